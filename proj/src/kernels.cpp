#include "mdsdelay/kernels.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "mdsdelay/errors.hpp"

namespace mdsdelay::kernels {

namespace {

using Wide = boost::multiprecision::cpp_bin_float_50;

double log_choose(int n, int m) {
    return std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
}

// Binomial(n, p) masses from log p and log(1-p), no subtraction anywhere.
std::vector<double> binomial_masses(int n, double log_p, double log_q) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) {
        const double lp = (m == 0 ? 0.0 : m * log_p) + (n == m ? 0.0 : (n - m) * log_q);
        out[static_cast<std::size_t>(m)] = std::exp(log_choose(n, m) + lp);
    }
    return out;
}

// sum_{i=lo}^{hi} w(i) * prod_{j=lo..hi, j!=i} j/(j-i), the building block of
// both literal death-process formulas. Empty sum (lo > hi) is zero.
Wide death_sum(int lo, int hi, const std::function<Wide(int)>& weight) {
    Wide sum = 0;
    for (int i = lo; i <= hi; ++i) {
        Wide prod = 1;
        for (int j = lo; j <= hi; ++j) {
            if (j == i) continue;
            prod *= Wide(j) / Wide(j - i);
        }
        sum += weight(i) * prod;
    }
    return sum;
}

std::vector<double> availability_literal(int n, double mu, double delta) {
    const Wide wmu = mu;
    const Wide wdelta = delta;
    // (1 - p_i) / mu_i with its i=0 limit.
    auto weight = [&](int i) -> Wide {
        if (i == 0) return wdelta;
        const Wide rate = wmu * i;
        return (1 - exp(-rate * wdelta)) / rate;
    };
    std::vector<double> h(static_cast<std::size_t>(n) + 1);
    for (int x = 0; x <= n; ++x) {
        const Wide v = (death_sum(x, n, weight) - death_sum(x + 1, n, weight)) / wdelta;
        h[static_cast<std::size_t>(x)] = static_cast<double>(v);
    }
    return h;
}

std::vector<double> availability_stable(int n, double mu, double delta) {
    const double md = mu * delta;
    const double q = -std::expm1(-md);  // per-node death probability over the interval
    const auto bin = binomial_masses(n, -md, std::log(q));

    std::vector<double> h(static_cast<std::size_t>(n) + 1);
    double cdf = 0.0;
    double upper = 0.0;
    for (int x = 1; x <= n; ++x) {
        cdf += bin[static_cast<std::size_t>(x - 1)];
        h[static_cast<std::size_t>(x)] = cdf / (md * x);
        upper += h[static_cast<std::size_t>(x)];
    }
    if (q <= 0.5) {
        // -log(1-q) - sum_{m<=n} q^m/m, written as its positive tail.
        double tail = 0.0;
        double qm = std::pow(q, n + 1);
        for (int m = n + 1; qm > 0.0; ++m) {
            const double term = qm / m;
            tail += term;
            if (term < 1e-20 * tail) break;
            qm *= q;
        }
        h[0] = tail / md;
    } else {
        h[0] = 1.0 - upper;
    }
    return h;
}

std::vector<double> departures_literal(int x, double mu, double t_d) {
    const Wide wmu = mu;
    const Wide wt = t_d;
    auto weight = [&](int i) -> Wide { return exp(-wmu * i * wt); };
    std::vector<double> g(static_cast<std::size_t>(x) + 1);
    for (int f = 0; f <= x; ++f) {
        const Wide v = death_sum(x - f, x, weight) - death_sum(x - f + 1, x, weight);
        g[static_cast<std::size_t>(f)] = static_cast<double>(v);
    }
    return g;
}

Pmf checked_pmf(std::vector<double> masses, const char* what, const std::string& context) {
    try {
        for (double& m : masses) m = clamp_probability(m, what);
        return Pmf(0, std::move(masses));
    } catch (const NumericalInstability& e) {
        throw NumericalInstability(std::string(what) + " (" + context + "): " + e.what());
    }
}

}  // namespace

Pmf availability_pmf(int n, double mu, double delta, Method method) {
    if (n < 1) throw InvalidParameter("availability_pmf: n must be >= 1");
    if (!(mu > 0.0) || !(delta > 0.0) || !std::isfinite(mu) || !std::isfinite(delta))
        throw InvalidParameter("availability_pmf: mu and delta must be finite and > 0");
    std::ostringstream ctx;
    ctx << "n=" << n << ", delta=" << delta;
    auto masses = method == Method::PaperForm ? availability_literal(n, mu, delta)
                                              : availability_stable(n, mu, delta);
    return checked_pmf(std::move(masses), "availability pmf", ctx.str());
}

Pmf departures_pmf(int x, double mu, double t_d, Method method) {
    if (x < 0) throw InvalidParameter("departures_pmf: x must be >= 0");
    if (!(mu > 0.0) || !(t_d > 0.0) || !std::isfinite(mu) || !std::isfinite(t_d))
        throw InvalidParameter("departures_pmf: mu and t_d must be finite and > 0");
    if (x == 0) return Pmf(0, {1.0});
    std::vector<double> masses;
    if (method == Method::PaperForm) {
        masses = departures_literal(x, mu, t_d);
    } else {
        const double mt = mu * t_d;
        masses = binomial_masses(x, std::log(-std::expm1(-mt)), -mt);
    }
    std::ostringstream ctx;
    ctx << "x=" << x << ", t_d=" << t_d;
    return checked_pmf(std::move(masses), "departures pmf", ctx.str());
}

double requester_survival(int i, double mu, double t_d) {
    if (i < 0) throw InvalidParameter("requester_survival: i must be >= 0");
    return std::exp(-i * mu * t_d);
}

double requester_departure_window(int i, double mu, double t_d) {
    if (i < 1) throw InvalidParameter("requester_departure_window: i must be >= 1");
    return std::exp(-(i - 1) * mu * t_d) * -std::expm1(-mu * t_d);
}

}  // namespace mdsdelay::kernels
