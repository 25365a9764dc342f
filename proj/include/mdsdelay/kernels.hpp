#pragma once

#include "mdsdelay/params.hpp"
#include "mdsdelay/pmf.hpp"

/// Closed-form probability kernels of the storage-node churn process.
namespace mdsdelay::kernels {

enum class Method {
    /// Literal alternating sum-of-products, evaluated in 50-digit arithmetic.
    PaperForm,
    /// All-positive binomial forms in double precision.
    StableForm,
};

/// Distribution of the number of live storage nodes seen by a request that
/// lands uniformly at random inside a repair interval. The storage set is
/// restored to n nodes at the start of every interval and then decays as a
/// pure-death process with per-node rate mu.
///
/// StableForm integrates the binomial-death transient in closed form:
///   h(x) = P(Binomial(n, e^{-mu*delta}) < x) / (mu * delta * x),  x >= 1
///   h(0) = (1 / (mu * delta)) * sum_{m > n} q^m / m,  q = 1 - e^{-mu*delta}
///
/// Throws NumericalInstability (naming n and delta) if the result is not a pmf.
Pmf availability_pmf(int n, double mu, double delta, Method method = Method::StableForm);

inline Pmf availability_pmf(const SystemParams& params, int n, Method method = Method::StableForm) {
    return availability_pmf(n, params.departure_rate, params.repair_interval, method);
}

/// Number of departures among x live nodes during one D2D slot of length t_d.
/// Both methods give Binomial(x, 1 - e^{-mu*t_d}); g(0,0) = 1.
Pmf departures_pmf(int x, double mu, double t_d, Method method = Method::StableForm);

/// a_i: requester still in the cell i slots after its request. a_0 = 1.
double requester_survival(int i, double mu, double t_d);

/// b_i: requester leaves during slot i, i >= 1. a_{i-1} = a_i + b_i.
double requester_departure_window(int i, double mu, double t_d);

}  // namespace mdsdelay::kernels
