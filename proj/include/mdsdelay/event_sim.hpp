#pragma once

#include <cstdint>
#include <vector>

#include "mdsdelay/delay_model.hpp"
#include "mdsdelay/params.hpp"

/// Discrete-event Monte-Carlo simulation of one cell with MDS-coded D2D storage.
namespace mdsdelay::sim {

enum class Mode {
    /// Exactly the analysis's assumptions: list snapshot at request time, every
    /// failed attempt costs a full slot, requesters are never storage nodes.
    Faithful,
    /// Requesters are drawn from the population (and may hold a symbol), an
    /// empty list fails immediately, a departing chosen node ends the attempt
    /// at its departure instant.
    Physical,
};

enum class RequestModel {
    AggregatePoisson,  // one Poisson stream of rate omega * M
    PerNode,           // each present node requests at rate omega (Physical mode only)
};

/// Event kinds in tie-break priority order for equal timestamps.
enum class EventKind : std::uint8_t {
    RepairBroadcast = 0,
    NodeDeparture = 1,
    NodeArrival = 2,
    FileRequest = 3,
    D2dAttemptEnd = 4,
    BsDownloadEnd = 5,
};

struct SimConfig {
    SystemParams params;
    CodeParams code;
    Mode mode = Mode::Faithful;
    RequestModel request_model = RequestModel::AggregatePoisson;
    std::int64_t num_requests = 100000;
    /// Negative selects the default: 10% of num_requests, at least 1000.
    std::int64_t warmup_requests = -1;
    std::uint64_t seed = 1;
    /// When nonempty, requests are issued at exactly these times (ascending)
    /// instead of the Poisson generator, and no warmup is applied.
    std::vector<double> scripted_requests;

    std::int64_t effective_warmup() const;
    std::int64_t effective_num_requests() const;
    void validate() const;
};

struct Histogram {
    double bin_width = 0.0;
    std::vector<std::int64_t> counts;

    bool operator==(const Histogram&) const = default;
};

struct SimReport {
    std::int64_t requests = 0;      // post-warmup requests
    std::int64_t d2d_requests = 0;  // of which served through the DS network
    std::int64_t busy_requests = 0; // of which found the DS network occupied

    double mean_delay = 0.0;
    double delay_stderr = 0.0;
    double busy_fraction = 0.0;
    double busy_fraction_stderr = 0.0;

    /// Frequencies over D2D-served requests: failed first attempt, j symbols
    /// then failure (j = 1..k-1), all symbols.
    model::OutcomeDistribution empirical_outcome;
    std::vector<std::int64_t> outcome_counts;  // [fail, partial 1..k-1, full]

    double mean_d2d_symbols = 0.0;
    double mean_occupancy = 0.0;
    double occupancy_stderr = 0.0;

    /// Mean occupancy over the first and second halves of the post-warmup
    /// request sequence (D2D-served requests only).
    double occupancy_first_half = 0.0;
    double occupancy_first_half_stderr = 0.0;
    double occupancy_second_half = 0.0;
    double occupancy_second_half_stderr = 0.0;

    /// Live listed storage nodes at each post-warmup request instant, index 0..n.
    std::vector<std::int64_t> list_size_counts;

    double time_average_population = 0.0;
    double simulated_time = 0.0;

    Histogram delay_histogram;  // bin width t_d / 2

    bool operator==(const SimReport&) const = default;
};

/// Runs warmup + num_requests requests to completion. A fixed config
/// reproduces the same report bit for bit. Throws SimulationFault on an
/// internal inconsistency.
SimReport simulate(const SimConfig& config);

struct AttemptOracleReport {
    std::int64_t trials = 0;
    model::OutcomeDistribution frequencies;
    std::vector<double> stderrs;  // per component, same order as outcome_counts
    std::vector<std::int64_t> outcome_counts;
    double mean_occupancy = 0.0;  // t.u.
    double occupancy_stderr = 0.0;
    double mean_symbols = 0.0;
};

/// Samples the serial attempt chain of a single D2D-served request: X_1 from
/// the availability pmf, exponential residual lifetimes for each listed node
/// and for the requester, uniform choice among uncontacted live nodes.
AttemptOracleReport d2d_attempt_oracle(const SystemParams& params, const CodeParams& code, std::int64_t trials,
                                       std::uint64_t seed);

}  // namespace mdsdelay::sim
