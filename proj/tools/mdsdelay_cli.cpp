// Command-line front end: single-point evaluation, simulation, sweeps, plots
// and analytic-vs-simulation comparison.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 strict
// comparison failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mdsdelay/delay_model.hpp"
#include "mdsdelay/errors.hpp"
#include "mdsdelay/event_sim.hpp"
#include "mdsdelay/harness.hpp"

using namespace mdsdelay;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitStrict = 3;

struct Overrides {
    std::string config;
    std::optional<double> nodes, mu, omega, t_ref;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> requests, warmup;
    std::optional<std::string> mode, request_model, engine;
    std::optional<int> threads;
};

struct PointOptions {
    int n = 4;
    int k = 2;
    double delta = 1.0;
    double ratio = 10.0;
    std::optional<double> t_d, t_bs;
    bool paper_form = false;
    bool paper_indexed = false;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "YAML config file")->check(CLI::ExistingFile);
    cmd->add_option("--nodes", o.nodes, "expected node count M");
    cmd->add_option("--mu", o.mu, "departure rate (arrival rate per node is equal)");
    cmd->add_option("--omega", o.omega, "request rate per node");
    cmd->add_option("--t-ref", o.t_ref, "BS-only file delay k*t_bs");
    cmd->add_option("--seed", o.seed, "simulation master seed");
    cmd->add_option("--requests", o.requests, "post-warmup simulated requests");
    cmd->add_option("--warmup", o.warmup, "warmup requests (default 10%, min 1000)");
    cmd->add_option("--mode", o.mode, "faithful|physical");
    cmd->add_option("--request-model", o.request_model, "aggregate|per_node");
    cmd->add_option("--threads", o.threads, "worker threads for sweeps");
}

void add_point(CLI::App* cmd, PointOptions& p) {
    cmd->add_option("-n", p.n, "code length");
    cmd->add_option("-k", p.k, "code dimension");
    cmd->add_option("--delta", p.delta, "repair interval");
    cmd->add_option("--ratio", p.ratio, "t_bs / t_d");
    cmd->add_option("--t-d", p.t_d, "D2D symbol time (overrides --ratio)");
    cmd->add_option("--t-bs", p.t_bs, "BS symbol time (default t_ref / k)");
    cmd->add_flag("--paper-form", p.paper_form, "evaluate kernels with the literal alternating sums");
    cmd->add_flag("--paper-indexed", p.paper_indexed, "use cumulative a_j survival indexing in the recursion");
}

harness::SweepSpec load(const Overrides& o) {
    harness::SweepSpec spec = o.config.empty() ? harness::parse_config_text("") : harness::parse_config(o.config);
    if (o.nodes) spec.base.expected_node_count = *o.nodes;
    if (o.mu) spec.base.departure_rate = *o.mu;
    if (o.omega) spec.base.request_rate_per_node = *o.omega;
    if (o.t_ref) spec.t_ref = *o.t_ref;
    if (o.seed) spec.sim.seed = *o.seed;
    if (o.requests) spec.sim.num_requests = *o.requests;
    if (o.warmup) spec.sim.warmup_requests = *o.warmup;
    if (o.mode) spec.sim.mode = harness::parse_mode(*o.mode);
    if (o.request_model) spec.sim.request_model = harness::parse_request_model(*o.request_model);
    if (o.engine) spec.engine = harness::parse_engine(*o.engine);
    if (o.threads) spec.threads = *o.threads;
    spec.validate();
    return spec;
}

std::pair<SystemParams, CodeParams> point(const harness::SweepSpec& spec, const PointOptions& p) {
    const CodeParams code{p.n, p.k};
    code.validate();
    SystemParams params = harness::point_params(spec, code, p.delta, p.ratio);
    if (p.t_bs) params.bs_symbol_time = *p.t_bs;
    params.d2d_symbol_time = p.t_d ? *p.t_d : params.bs_symbol_time / p.ratio;
    params.validate();
    for (const auto& w : params.warnings()) std::cerr << "warning: " << w << "\n";
    for (const auto& w : code.warnings(params)) std::cerr << "warning: " << w << "\n";
    return {params, code};
}

void print_outcome(const model::OutcomeDistribution& o) {
    std::cout << "p_fail_first " << o.p_fail_first << "\n";
    for (std::size_t j = 0; j < o.p_partial.size(); ++j) std::cout << "p_partial[" << j + 1 << "] " << o.p_partial[j] << "\n";
    std::cout << "p_full " << o.p_full << "\n";
}

int run_analytic(const Overrides& o, const PointOptions& p) {
    const auto spec = load(o);
    const auto [params, code] = point(spec, p);
    model::ModelOptions opts;
    if (p.paper_form) opts.method = kernels::Method::PaperForm;
    if (p.paper_indexed) opts.survival = model::SurvivalIndexing::PaperIndexed;
    const auto s = model::avg_download_delay(params, code, opts);
    std::cout << std::setprecision(9);
    std::cout << "n " << code.n << "\nk " << code.k << "\ndelta " << params.repair_interval << "\nt_d "
              << params.d2d_symbol_time << "\nt_bs " << params.bs_symbol_time << "\n";
    print_outcome(s.outcome);
    std::cout << "eta " << s.eta << "\nt_eta " << s.t_eta << "\np_idle " << s.p_idle << " (approximate)\nt_dw "
              << s.t_dw << "\nt_ref " << s.t_ref << "\ngain " << s.gain << "\n";
    return 0;
}

int run_simulate(const Overrides& o, const PointOptions& p) {
    const auto spec = load(o);
    const auto [params, code] = point(spec, p);
    sim::SimConfig cfg;
    cfg.params = params;
    cfg.code = code;
    cfg.mode = spec.sim.mode;
    cfg.request_model = spec.sim.request_model;
    cfg.num_requests = spec.sim.num_requests;
    cfg.warmup_requests = spec.sim.warmup_requests;
    cfg.seed = spec.sim.seed;
    const auto r = sim::simulate(cfg);
    std::cout << std::setprecision(9);
    std::cout << "requests " << r.requests << "\nd2d_requests " << r.d2d_requests << "\nmean_delay " << r.mean_delay
              << " +- " << r.delay_stderr << "\nbusy_fraction " << r.busy_fraction << " +- " << r.busy_fraction_stderr
              << "\n";
    print_outcome(r.empirical_outcome);
    std::cout << "mean_d2d_symbols " << r.mean_d2d_symbols << "\nmean_occupancy " << r.mean_occupancy << " +- "
              << r.occupancy_stderr << "\noccupancy_halves " << r.occupancy_first_half << " "
              << r.occupancy_second_half << "\ntime_average_population " << r.time_average_population
              << "\nsimulated_time " << r.simulated_time << "\n";
    return 0;
}

std::string ratio_tag(double ratio) {
    std::ostringstream os;
    os << ratio;
    return os.str();
}

int run_sweep_cmd(const Overrides& o, const std::string& out, const std::string& svg_prefix) {
    const auto spec = load(o);
    const auto rows = harness::run_sweep(spec);
    harness::emit_csv(rows, out);
    std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
    if (!svg_prefix.empty()) {
        for (double ratio : spec.ratios) {
            std::vector<harness::SweepRow> subset;
            for (const auto& r : rows)
                if (std::abs(r.t_bs / r.t_d - ratio) <= 1e-6 * ratio) subset.push_back(r);
            const std::string path = svg_prefix + "_ratio" + ratio_tag(ratio) + ".svg";
            harness::emit_svg(subset, path);
            std::cout << "wrote " << path << "\n";
        }
    }
    return 0;
}

int run_plot(const std::string& in, const std::string& out, std::optional<double> ratio) {
    std::ifstream f(in);
    if (!f) throw InvalidParameter("cannot open " + in);
    std::ostringstream buf;
    buf << f.rdbuf();
    auto rows = harness::parse_csv(buf.str());
    if (ratio) {
        std::erase_if(rows, [&](const harness::SweepRow& r) { return std::abs(r.t_bs / r.t_d - *ratio) > 1e-6 * *ratio; });
    }
    harness::emit_svg(rows, out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_compare(const Overrides& o, bool strict, double tolerance) {
    const auto spec = load(o);
    const auto result = harness::compare_report(spec, tolerance);
    std::cout << result.text;
    return strict && result.flagged > 0 ? kExitStrict : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Download delay of MDS-coded D2D distributed storage: analysis and simulation"};
    app.require_subcommand(1);

    Overrides o;
    PointOptions p;

    auto* analytic = app.add_subcommand("analytic", "evaluate the analytical delay model at one point");
    add_overrides(analytic, o);
    add_point(analytic, p);

    auto* simulate = app.add_subcommand("simulate", "run the discrete-event simulator at one point");
    add_overrides(simulate, o);
    add_point(simulate, p);

    std::string out = "sweep.csv";
    std::string svg_prefix;
    auto* sweep = app.add_subcommand("sweep", "sweep codes, repair intervals and t_bs/t_d ratios");
    add_overrides(sweep, o);
    sweep->add_option("--engine", o.engine, "analytic|simulate|both");
    sweep->add_option("-o,--out", out, "CSV output path");
    sweep->add_option("--svg", svg_prefix, "write PREFIX_ratio<R>.svg per ratio");

    std::string plot_in;
    std::string plot_out = "gain.svg";
    std::optional<double> plot_ratio;
    auto* plot = app.add_subcommand("plot", "render a gain-vs-delta SVG from a sweep CSV");
    plot->add_option("-i,--in", plot_in, "sweep CSV")->required()->check(CLI::ExistingFile);
    plot->add_option("-o,--out", plot_out, "SVG output path");
    plot->add_option("--ratio", plot_ratio, "select rows with this t_bs/t_d ratio");

    bool strict = false;
    double tolerance = 0.05;
    auto* compare = app.add_subcommand("compare", "analytic vs simulation report");
    add_overrides(compare, o);
    compare->add_flag("--strict", strict, "exit 3 when any point exceeds the tolerance");
    compare->add_option("--tolerance", tolerance, "relative tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*analytic) return run_analytic(o, p);
        if (*simulate) return run_simulate(o, p);
        if (*sweep) return run_sweep_cmd(o, out, svg_prefix);
        if (*plot) return run_plot(plot_in, plot_out, plot_ratio);
        if (*compare) return run_compare(o, strict, tolerance);
    } catch (const InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
