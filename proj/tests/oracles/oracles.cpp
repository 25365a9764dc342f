#include "oracles.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mdsdelay::oracles {

namespace {

std::uint64_t choose(int n, int m) {
    std::uint64_t c = 1;
    for (int i = 1; i <= m; ++i) c = c * static_cast<std::uint64_t>(n - m + i) / static_cast<std::uint64_t>(i);
    return c;
}

// Binomial(n, s) pmf at every count, by direct powers.
void binomial_row(int n, double s, std::vector<double>& out) {
    for (int x = 0; x <= n; ++x)
        out[static_cast<std::size_t>(x)] =
            static_cast<double>(choose(n, x)) * std::pow(s, x) * std::pow(1.0 - s, n - x);
}

struct Enumerator {
    int k;
    double leave;     // per-slot departure probability of a listed node
    double requester; // per-slot departure probability of the requester
    std::vector<double> outcome;  // [0 symbols, 1, ..., k]

    // `alive` is the bitmask of listed nodes that are present and not yet used.
    void slot(unsigned alive, int obtained, double prob) {
        outcome[static_cast<std::size_t>(obtained)] += prob * requester;
        const double stay = prob * (1.0 - requester);
        if (alive == 0) {
            outcome[static_cast<std::size_t>(obtained)] += stay;
            return;
        }
        const int count = __builtin_popcount(alive);
        // Every subset of the present nodes may leave during this slot.
        for (unsigned gone = alive;; gone = (gone - 1) & alive) {
            const int g = __builtin_popcount(gone);
            const double p_pattern = std::pow(leave, g) * std::pow(1.0 - leave, count - g);
            for (unsigned bit = 0; bit < 32; ++bit) {
                const unsigned pick = 1u << bit;
                if (!(alive & pick)) continue;
                const double p = stay * p_pattern / count;
                if (gone & pick) {
                    outcome[static_cast<std::size_t>(obtained)] += p;
                } else if (obtained + 1 == k) {
                    outcome[static_cast<std::size_t>(k)] += p;
                } else {
                    slot(alive & ~gone & ~pick, obtained + 1, p);
                }
            }
            if (gone == 0) break;
        }
    }
};

}  // namespace

void QuadratureSpec::validate() const {
    if (subintervals < 16 || subintervals % 2 != 0)
        throw std::invalid_argument("quadrature needs an even subinterval count >= 16");
}

int fine_subintervals(int n, double mu, double delta) {
    const double needed = 40.0 * n * mu * delta;
    int m = 4096;
    while (m < needed) m *= 2;
    return m;
}

Pmf availability_quadrature(int n, double mu, double delta, QuadratureSpec spec) {
    spec.validate();
    const int m = spec.subintervals;
    const double h = delta / m;
    std::vector<double> acc(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> row(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= m; ++i) {
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        binomial_row(n, std::exp(-mu * h * i), row);
        for (int x = 0; x <= n; ++x) acc[static_cast<std::size_t>(x)] += w * row[static_cast<std::size_t>(x)];
    }
    for (double& a : acc) a *= h / 3.0 / delta;
    return Pmf(0, acc);
}

Pmf departures_binomial(int x, double mu, double t_d) {
    std::vector<double> row(static_cast<std::size_t>(x) + 1);
    binomial_row(x, 1.0 - std::exp(-mu * t_d), row);
    return Pmf(0, row);
}

model::OutcomeDistribution exhaustive_outcome_small(const SystemParams& params, const CodeParams& code) {
    if (code.n > 3 || code.k > 2 || code.k < 1 || code.k > code.n)
        throw std::invalid_argument("exhaustive_outcome_small: instance too large (needs n <= 3, k <= 2)");
    const double mu = params.departure_rate;
    const Pmf h = availability_quadrature(code.n, mu, params.repair_interval,
                                          {fine_subintervals(code.n, mu, params.repair_interval)});

    Enumerator e;
    e.k = code.k;
    e.leave = 1.0 - std::exp(-mu * params.d2d_symbol_time);
    e.requester = e.leave;
    e.outcome.assign(static_cast<std::size_t>(code.k) + 1, 0.0);
    for (int x1 = 0; x1 <= code.n; ++x1) e.slot((1u << x1) - 1u, 0, h[x1]);

    model::OutcomeDistribution out;
    out.p_fail_first = e.outcome[0];
    for (int j = 1; j < code.k; ++j) out.p_partial.push_back(e.outcome[static_cast<std::size_t>(j)]);
    out.p_full = e.outcome[static_cast<std::size_t>(code.k)];
    return out;
}

}  // namespace mdsdelay::oracles
