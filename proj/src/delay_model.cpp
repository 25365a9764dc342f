#include "mdsdelay/delay_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mdsdelay/errors.hpp"

namespace mdsdelay::model {

namespace {

constexpr double kPartitionTolerance = 1e-8;

void validate_inputs(const SystemParams& params, const CodeParams& code) {
    params.validate();
    code.validate();
}

// Survival factor for the success check of attempt `attempt` (1-based).
double attempt_survival(int attempt, const SystemParams& params, const ModelOptions& opts) {
    const double mu = params.departure_rate;
    const double td = params.d2d_symbol_time;
    if (opts.survival == SurvivalIndexing::PerSlot) return kernels::requester_survival(1, mu, td);
    return kernels::requester_survival(attempt, mu, td);
}

// Recursion factor for building gamma_j from gamma_{j-1}.
double recursion_survival(int j, const SystemParams& params, const ModelOptions& opts) {
    const double mu = params.departure_rate;
    const double td = params.d2d_symbol_time;
    if (opts.survival == SurvivalIndexing::PerSlot) return kernels::requester_survival(1, mu, td);
    return kernels::requester_survival(j - 1, mu, td);
}

std::vector<Pmf> departure_table(int n, const SystemParams& params, kernels::Method method) {
    std::vector<Pmf> g;
    g.reserve(static_cast<std::size_t>(n) + 1);
    for (int x = 0; x <= n; ++x)
        g.push_back(kernels::departures_pmf(x, params.departure_rate, params.d2d_symbol_time, method));
    return g;
}

// sum_{x>=1} sum_{f<=x} ((x-f)/x) * gamma_j(x, f): reaching attempt j and
// picking a node that outlives the slot.
double surviving_pick_mass(const GammaTable& gamma, int j) {
    double s = 0.0;
    for (int x = 1; x <= gamma.n(); ++x)
        for (int f = 0; f < x; ++f) s += (static_cast<double>(x - f) / x) * gamma(j, x, f);
    return s;
}

}  // namespace

GammaTable::GammaTable(int k, int n)
    : k_(k), n_(n), data_(static_cast<std::size_t>(k) * (n + 1) * (n + 1), 0.0) {}

double GammaTable::mass(int j) const {
    const auto first = data_.begin() + static_cast<std::ptrdiff_t>(index(j, 0, 0));
    return std::accumulate(first, first + static_cast<std::ptrdiff_t>((n_ + 1) * (n_ + 1)), 0.0);
}

double OutcomeDistribution::total() const {
    return p_fail_first + std::accumulate(p_partial.begin(), p_partial.end(), 0.0) + p_full;
}

GammaTable gamma_table(const SystemParams& params, const CodeParams& code, const ModelOptions& opts) {
    validate_inputs(params, code);
    const int n = code.n;
    const int k = code.k;
    const Pmf h = kernels::availability_pmf(params, n, opts.method);
    const auto g = departure_table(n, params, opts.method);

    GammaTable gamma(k, n);
    for (int x = 0; x <= n; ++x)
        for (int f = 0; f <= x; ++f) gamma.at(1, x, f) = h[x] * g[static_cast<std::size_t>(x)][f];

    // After a success from x' nodes with f' departures, x = x' - f' - 1 remain,
    // so the double sum over (x', f') collapses to f' with x' = x + f' + 1.
    for (int j = 2; j <= k; ++j) {
        const double a = recursion_survival(j, params, opts);
        for (int x = 0; x < n; ++x) {
            double inflow = 0.0;
            for (int fp = 0; x + fp + 1 <= n; ++fp) {
                const int xp = x + fp + 1;
                inflow += (static_cast<double>(xp - fp) / xp) * gamma(j - 1, xp, fp);
            }
            if (inflow == 0.0) continue;
            const Pmf& gx = g[static_cast<std::size_t>(x)];
            for (int f = 0; f <= x; ++f) gamma.at(j, x, f) = gx[f] * a * inflow;
        }
    }
    return gamma;
}

double p_fail_first(const SystemParams& params, const CodeParams& code, const ModelOptions& opts) {
    validate_inputs(params, code);
    const double mu = params.departure_rate;
    const double td = params.d2d_symbol_time;
    const Pmf h = kernels::availability_pmf(params, code.n, opts.method);
    const double a1 = kernels::requester_survival(1, mu, td);
    const double b1 = kernels::requester_departure_window(1, mu, td);

    double picked_leaver = 0.0;
    for (int x = 1; x <= code.n; ++x) {
        const Pmf g = kernels::departures_pmf(x, mu, td, opts.method);
        for (int f = 1; f <= x; ++f) picked_leaver += (static_cast<double>(f) / x) * h[x] * g[f];
    }
    return clamp_probability(b1 + a1 * h[0] + a1 * picked_leaver, "p_fail_first");
}

double p_full(const GammaTable& gamma, const SystemParams& params, const CodeParams& code,
              const ModelOptions& opts) {
    if (gamma.k() != code.k || gamma.n() != code.n)
        throw InvalidParameter("p_full: gamma table dimensions do not match the code");
    const double a = attempt_survival(code.k, params, opts);
    return clamp_probability(a * surviving_pick_mass(gamma, code.k), "p_full");
}

double p_partial(int j, const GammaTable& gamma, const SystemParams& params, const CodeParams& code,
                 const ModelOptions& opts) {
    if (j < 1 || j > code.k - 1) {
        std::ostringstream os;
        os << "p_partial: j=" << j << " outside 1.." << code.k - 1;
        throw InvalidParameter(os.str());
    }
    if (gamma.k() != code.k || gamma.n() != code.n)
        throw InvalidParameter("p_partial: gamma table dimensions do not match the code");
    const double a = attempt_survival(j + 1, params, opts);
    // Everything that reaches attempt j+1 and does not succeed there.
    double p = gamma(j + 1, 0, 0);
    for (int x = 1; x <= gamma.n(); ++x)
        for (int f = 0; f <= x; ++f) p += (1.0 - (static_cast<double>(x - f) / x) * a) * gamma(j + 1, x, f);
    return clamp_probability(p, "p_partial");
}

OutcomeDistribution outcome_distribution(const SystemParams& params, const CodeParams& code,
                                         const ModelOptions& opts) {
    const GammaTable gamma = gamma_table(params, code, opts);
    OutcomeDistribution out;
    out.p_fail_first = p_fail_first(params, code, opts);
    for (int j = 1; j < code.k; ++j) out.p_partial.push_back(p_partial(j, gamma, params, code, opts));
    out.p_full = p_full(gamma, params, code, opts);

    const double deficit = 1.0 - out.total();
    if (std::abs(deficit) > kPartitionTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "download outcomes for (" << code.n << "," << code.k << ") sum to " << out.total()
           << ", deficit " << deficit;
        throw ModelInconsistency(os.str());
    }
    out.p_fail_first = clamp_probability(out.p_fail_first + deficit, "p_fail_first");
    return out;
}

double eta(const OutcomeDistribution& outcome, const CodeParams& code) {
    double e = code.k * outcome.p_full;
    for (std::size_t i = 0; i < outcome.p_partial.size(); ++i) e += static_cast<double>(i + 1) * outcome.p_partial[i];
    return e;
}

double t_eta(const OutcomeDistribution& outcome, const CodeParams& code, double t_d) {
    const double failures = outcome.p_fail_first +
                            std::accumulate(outcome.p_partial.begin(), outcome.p_partial.end(), 0.0);
    return t_d * (eta(outcome, code) + failures);
}

double p_idle(const SystemParams& params, double t_eta_value) {
    if (!(t_eta_value >= 0.0)) throw InvalidParameter("p_idle: t_eta must be >= 0");
    return 1.0 / (1.0 + params.request_rate_per_node * params.expected_node_count * t_eta_value);
}

DelaySummary summarize(const OutcomeDistribution& outcome, const SystemParams& params, const CodeParams& code,
                       double p_idle_value, IdleForm form) {
    if (!(p_idle_value >= 0.0 && p_idle_value <= 1.0)) throw InvalidParameter("summarize: p_idle outside [0,1]");
    const double k = code.k;
    const double t_bs = params.bs_symbol_time;

    DelaySummary s;
    s.outcome = outcome;
    s.eta = eta(outcome, code);
    s.t_eta = t_eta(outcome, code, params.d2d_symbol_time);
    s.p_idle = p_idle_value;
    s.idle_form = form;
    s.t_ref = k * t_bs;
    s.t_dw = p_idle_value * (s.t_eta + (k - s.eta) * t_bs) + (1.0 - p_idle_value) * k * t_bs;
    s.gain = s.t_ref / s.t_dw;
    return s;
}

DelaySummary avg_download_delay(const SystemParams& params, const CodeParams& code, const ModelOptions& opts) {
    const OutcomeDistribution outcome = outcome_distribution(params, code, opts);
    const double occupancy = t_eta(outcome, code, params.d2d_symbol_time);
    return summarize(outcome, params, code, p_idle(params, occupancy), IdleForm::Approximate);
}

}  // namespace mdsdelay::model
