#pragma once

#include <string>
#include <vector>

namespace mdsdelay {

/// Cell-level stochastic parameters. Times are in time units (t.u.), rates in 1/t.u.
///
/// Nodes arrive at aggregate rate M*lambda and stay an exponential lifetime of
/// rate mu. The model fixes lambda = mu so the mean population is M; the
/// arrival rate is therefore derived, not stored.
struct SystemParams {
    double expected_node_count = 30.0;     // M
    double departure_rate = 1.0;           // mu
    double request_rate_per_node = 0.02;   // omega
    double d2d_symbol_time = 0.01;         // t_d
    double bs_symbol_time = 0.1;           // t_bs
    double repair_interval = 1.0;          // Delta

    double arrival_rate_per_slot() const { return departure_rate; }

    /// Throws InvalidParameter on a hard violation.
    void validate() const;

    /// Soft violations of modeling premises (t_bs < t_d).
    std::vector<std::string> warnings() const;
};

/// (n,k) MDS code: n coded symbols, any k recover the file.
struct CodeParams {
    int n = 1;
    int k = 1;

    double rate() const { return static_cast<double>(k) / n; }

    void validate() const;

    /// Flags n > M/3, where the n << M premise starts to break down.
    std::vector<std::string> warnings(const SystemParams& params) const;
};

}  // namespace mdsdelay
