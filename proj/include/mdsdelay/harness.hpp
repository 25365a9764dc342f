#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdsdelay/event_sim.hpp"
#include "mdsdelay/params.hpp"

/// Parameter sweeps over the repair interval and code set, with CSV/SVG output.
namespace mdsdelay::harness {

enum class Engine { Analytic, Simulate, Both };

struct SimOptions {
    sim::Mode mode = sim::Mode::Faithful;
    sim::RequestModel request_model = sim::RequestModel::AggregatePoisson;
    std::int64_t num_requests = 100000;
    std::int64_t warmup_requests = -1;
    std::uint64_t seed = 1;
};

struct SweepSpec {
    /// M, mu and omega are used as-is; t_d, t_bs and delta are set per row.
    SystemParams base;
    double t_ref = 1.0;
    std::vector<CodeParams> codes{{1, 1}, {2, 1}, {4, 2}, {8, 4}};
    std::vector<double> deltas = log_grid(1e-2, 1e2, 25);
    std::vector<double> ratios{10.0, 100.0, 1000.0};  // t_bs / t_d
    Engine engine = Engine::Analytic;
    SimOptions sim;
    int threads = 1;

    void validate() const;

    static std::vector<double> log_grid(double lo, double hi, int count);
};

struct SweepRow {
    int n = 0;
    int k = 0;
    double delta = 0.0;
    double t_d = 0.0;
    double t_bs = 0.0;
    Engine engine = Engine::Analytic;  // Analytic or Simulate
    double eta = 0.0;
    double t_eta = 0.0;
    double p_idle = 0.0;
    double t_dw = 0.0;
    double gain = 0.0;
    std::optional<double> t_dw_stderr;
    std::optional<double> busy_frac;
    std::optional<double> busy_frac_stderr;
    std::optional<double> rel_diff;  // |sim - analytic| / analytic for t_dw, Both runs only
};

const char* engine_name(Engine engine);
Engine parse_engine(const std::string& name);
sim::Mode parse_mode(const std::string& name);
sim::RequestModel parse_request_model(const std::string& name);

/// Reads a YAML config; an empty file yields the defaults. Unknown or
/// malformed keys throw InvalidParameter naming the key.
SweepSpec parse_config(const std::filesystem::path& path);
SweepSpec parse_config_text(const std::string& text);

/// System parameters for one (code, delta, ratio) point: t_bs = t_ref / k,
/// t_d = t_bs / ratio.
SystemParams point_params(const SweepSpec& spec, const CodeParams& code, double delta, double ratio);

/// Rows ordered by ratio, then code, then delta; Both emits the analytic row
/// followed by the simulated one.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// CSV with the fixed column set; stderr/busy/rel_diff columns are present
/// when any row carries them. 9 significant digits, LF line ends.
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::string format_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_csv(const std::string& text);

/// Gain-vs-delta chart with a log x axis, one series per code (and engine).
/// Rows must share one t_bs/t_d ratio.
void emit_svg(const std::vector<SweepRow>& rows, const std::filesystem::path& path);
std::string render_svg(const std::vector<SweepRow>& rows);

struct CompareResult {
    std::string text;
    int flagged = 0;
};

/// Runs analytic and simulation side by side and flags points whose t_dw or
/// busy fraction differ by more than `tolerance` (relative).
CompareResult compare_report(const SweepSpec& spec, double tolerance = 0.05);

}  // namespace mdsdelay::harness
