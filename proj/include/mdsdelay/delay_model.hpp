#pragma once

#include <vector>

#include "mdsdelay/kernels.hpp"
#include "mdsdelay/params.hpp"

/// Analytical download-delay pipeline for MDS-coded D2D storage.
namespace mdsdelay::model {

/// Which requester-survival factor multiplies each successful attempt.
enum class SurvivalIndexing {
    /// e^{-mu t_d} per slot: the requester survived the earlier slots already.
    PerSlot,
    /// a_{j-1} in the recursion, a_k for the full download and a_{j+1} for a
    /// partial one, as the formulas are printed. Survival compounds across
    /// slots, so this only matches the attempt process when k = 1.
    PaperIndexed,
};

struct ModelOptions {
    kernels::Method method = kernels::Method::StableForm;
    SurvivalIndexing survival = SurvivalIndexing::PerSlot;
};

/// gamma_j(x, f) = P(F_j = f, X_j = x, first j-1 attempts succeeded) for
/// j = 1..k, x, f = 0..n. Immutable once built.
class GammaTable {
public:
    GammaTable(int k, int n);

    int k() const { return k_; }
    int n() const { return n_; }

    double operator()(int j, int x, int f) const { return data_[index(j, x, f)]; }
    double& at(int j, int x, int f) { return data_[index(j, x, f)]; }

    /// Total probability of reaching attempt j with j-1 successes.
    double mass(int j) const;

private:
    std::size_t index(int j, int x, int f) const {
        return (static_cast<std::size_t>(j - 1) * (n_ + 1) + x) * (n_ + 1) + f;
    }

    int k_;
    int n_;
    std::vector<double> data_;
};

/// Probabilities of the D2D outcomes of one request served by the DS network.
struct OutcomeDistribution {
    double p_fail_first = 0.0;       // no symbol obtained
    std::vector<double> p_partial;   // p_partial[j-1]: exactly j symbols, j = 1..k-1
    double p_full = 0.0;             // all k symbols

    double partial(int j) const { return p_partial.at(static_cast<std::size_t>(j - 1)); }
    double total() const;

    bool operator==(const OutcomeDistribution&) const = default;
};

enum class IdleForm {
    Approximate,  // 1 / (1 + omega * M * T_eta)
    Forced,       // supplied by the caller
};

struct DelaySummary {
    double eta = 0.0;     // mean D2D symbols per D2D-served request
    double t_eta = 0.0;   // mean DS-network occupancy per D2D-served request
    double p_idle = 1.0;  // probability the DS network is idle at a request
    double t_dw = 0.0;    // average file download delay
    double t_ref = 0.0;   // BS-only delay k * t_bs
    double gain = 1.0;    // t_ref / t_dw
    IdleForm idle_form = IdleForm::Approximate;
    OutcomeDistribution outcome;
};

GammaTable gamma_table(const SystemParams& params, const CodeParams& code, const ModelOptions& opts = {});

double p_fail_first(const SystemParams& params, const CodeParams& code, const ModelOptions& opts = {});

double p_full(const GammaTable& gamma, const SystemParams& params, const CodeParams& code,
              const ModelOptions& opts = {});

/// Exactly j symbols via D2D, then a failed attempt. Requires 1 <= j <= k-1.
double p_partial(int j, const GammaTable& gamma, const SystemParams& params, const CodeParams& code,
                 const ModelOptions& opts = {});

/// Bundles all outcomes. A partition deficit up to 1e-8 is folded into
/// p_fail_first; anything larger throws ModelInconsistency.
OutcomeDistribution outcome_distribution(const SystemParams& params, const CodeParams& code,
                                         const ModelOptions& opts = {});

double eta(const OutcomeDistribution& outcome, const CodeParams& code);

/// t_d * (eta + p_fail_first + sum_j p_partial[j]): a failure after j symbols
/// occupies j + 1 slots.
double t_eta(const OutcomeDistribution& outcome, const CodeParams& code, double t_d);

double p_idle(const SystemParams& params, double t_eta);

/// Full delay decomposition with the approximate idle probability.
DelaySummary avg_download_delay(const SystemParams& params, const CodeParams& code,
                                const ModelOptions& opts = {});

/// Same decomposition for a given outcome distribution and idle probability.
DelaySummary summarize(const OutcomeDistribution& outcome, const SystemParams& params, const CodeParams& code,
                       double p_idle_value, IdleForm form);

}  // namespace mdsdelay::model
