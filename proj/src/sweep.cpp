#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "mdsdelay/delay_model.hpp"
#include "mdsdelay/errors.hpp"
#include "mdsdelay/harness.hpp"

namespace mdsdelay::harness {

namespace {

struct Point {
    CodeParams code;
    double delta;
    double ratio;
};

std::vector<Point> enumerate(const SweepSpec& spec) {
    std::vector<Point> points;
    for (double ratio : spec.ratios)
        for (const CodeParams& code : spec.codes)
            for (double delta : spec.deltas) points.push_back({code, delta, ratio});
    return points;
}

SweepRow base_row(const Point& pt, const SystemParams& params) {
    SweepRow row;
    row.n = pt.code.n;
    row.k = pt.code.k;
    row.delta = pt.delta;
    row.t_d = params.d2d_symbol_time;
    row.t_bs = params.bs_symbol_time;
    return row;
}

std::vector<SweepRow> evaluate(const SweepSpec& spec, const Point& pt, std::size_t index) {
    const SystemParams params = point_params(spec, pt.code, pt.delta, pt.ratio);
    std::vector<SweepRow> rows;
    std::optional<double> analytic_t_dw;

    if (spec.engine != Engine::Simulate) {
        const model::DelaySummary s = model::avg_download_delay(params, pt.code);
        SweepRow row = base_row(pt, params);
        row.engine = Engine::Analytic;
        row.eta = s.eta;
        row.t_eta = s.t_eta;
        row.p_idle = s.p_idle;
        row.t_dw = s.t_dw;
        row.gain = s.gain;
        analytic_t_dw = s.t_dw;
        rows.push_back(row);
    }
    if (spec.engine != Engine::Analytic) {
        sim::SimConfig cfg;
        cfg.params = params;
        cfg.code = pt.code;
        cfg.mode = spec.sim.mode;
        cfg.request_model = spec.sim.request_model;
        cfg.num_requests = spec.sim.num_requests;
        cfg.warmup_requests = spec.sim.warmup_requests;
        cfg.seed = spec.sim.seed + index;
        const sim::SimReport r = sim::simulate(cfg);
        SweepRow row = base_row(pt, params);
        row.engine = Engine::Simulate;
        row.eta = r.mean_d2d_symbols;
        row.t_eta = r.mean_occupancy;
        row.p_idle = 1.0 - r.busy_fraction;
        row.t_dw = r.mean_delay;
        row.gain = pt.code.k * params.bs_symbol_time / r.mean_delay;
        row.t_dw_stderr = r.delay_stderr;
        row.busy_frac = r.busy_fraction;
        row.busy_frac_stderr = r.busy_fraction_stderr;
        if (analytic_t_dw) row.rel_diff = std::abs(r.mean_delay - *analytic_t_dw) / *analytic_t_dw;
        rows.push_back(row);
    }
    return rows;
}

std::string context(const Point& pt) {
    std::ostringstream os;
    os << "point (n=" << pt.code.n << ", k=" << pt.code.k << ", delta=" << pt.delta << ", ratio=" << pt.ratio
       << "): ";
    return os.str();
}

}  // namespace

std::vector<double> SweepSpec::log_grid(double lo, double hi, int count) {
    if (count < 1) throw InvalidParameter("log grid needs count >= 1");
    if (count == 1) return {lo};
    std::vector<double> out;
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (int i = 0; i < count; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void SweepSpec::validate() const {
    SystemParams probe = base;
    probe.d2d_symbol_time = 1.0;
    probe.bs_symbol_time = 1.0;
    probe.repair_interval = 1.0;
    probe.validate();
    if (!(t_ref > 0.0) || !std::isfinite(t_ref)) throw InvalidParameter("t_ref must be finite and > 0");
    if (codes.empty()) throw InvalidParameter("code list is empty");
    for (const auto& c : codes) c.validate();
    if (deltas.empty()) throw InvalidParameter("delta grid is empty");
    for (double d : deltas)
        if (!(d > 0.0) || !std::isfinite(d)) throw InvalidParameter("delta values must be finite and > 0");
    if (ratios.empty()) throw InvalidParameter("ratio list is empty");
    for (double r : ratios)
        if (!(r > 0.0) || !std::isfinite(r)) throw InvalidParameter("ratios must be finite and > 0");
    if (threads < 1) throw InvalidParameter("threads must be >= 1");
    if (engine != Engine::Analytic) {
        if (sim.num_requests < 1) throw InvalidParameter("simulation.num_requests must be >= 1");
        if (!(base.request_rate_per_node > 0.0))
            throw InvalidParameter("simulation needs request_rate_per_node > 0");
        if (sim.mode == sim::Mode::Faithful && sim.request_model == sim::RequestModel::PerNode)
            throw InvalidParameter("per_node requests require physical mode");
    }
}

const char* engine_name(Engine engine) {
    switch (engine) {
        case Engine::Analytic: return "analytic";
        case Engine::Simulate: return "simulate";
        case Engine::Both: return "both";
    }
    return "?";
}

Engine parse_engine(const std::string& name) {
    if (name == "analytic") return Engine::Analytic;
    if (name == "simulate") return Engine::Simulate;
    if (name == "both") return Engine::Both;
    throw InvalidParameter("unknown engine '" + name + "' (analytic|simulate|both)");
}

sim::Mode parse_mode(const std::string& name) {
    if (name == "faithful") return sim::Mode::Faithful;
    if (name == "physical") return sim::Mode::Physical;
    throw InvalidParameter("unknown mode '" + name + "' (faithful|physical)");
}

sim::RequestModel parse_request_model(const std::string& name) {
    if (name == "aggregate") return sim::RequestModel::AggregatePoisson;
    if (name == "per_node") return sim::RequestModel::PerNode;
    throw InvalidParameter("unknown request model '" + name + "' (aggregate|per_node)");
}

SystemParams point_params(const SweepSpec& spec, const CodeParams& code, double delta, double ratio) {
    SystemParams p = spec.base;
    p.bs_symbol_time = spec.t_ref / code.k;
    p.d2d_symbol_time = p.bs_symbol_time / ratio;
    p.repair_interval = delta;
    return p;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const auto points = enumerate(spec);
    std::vector<std::vector<SweepRow>> results(points.size());
    std::vector<std::exception_ptr> errors(points.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                results[i] = evaluate(spec, points[i], i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        const auto workers = static_cast<std::size_t>(std::min<std::size_t>(spec.threads, points.size()));
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
        worker();
    }

    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const InvalidParameter& e) {
                throw InvalidParameter(context(points[i]) + e.what());
            } catch (const std::exception& e) {
                throw std::runtime_error(context(points[i]) + e.what());
            }
        }
        for (auto& r : results[i]) rows.push_back(std::move(r));
    }
    return rows;
}

CompareResult compare_report(const SweepSpec& spec, double tolerance) {
    SweepSpec both = spec;
    both.engine = Engine::Both;
    const auto rows = run_sweep(both);

    CompareResult out;
    std::ostringstream os;
    os << std::setprecision(6);
    os << "n,k,delta,ratio: t_dw analytic / sim (rel) | busy analytic / sim (rel)\n";
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
        const SweepRow& a = rows[i];
        const SweepRow& s = rows[i + 1];
        const double busy_model = 1.0 - a.p_idle;
        const double busy_sim = s.busy_frac.value_or(0.0);
        const double rel_dw = std::abs(s.t_dw - a.t_dw) / a.t_dw;
        const double rel_busy = busy_model > 0.0 ? std::abs(busy_sim - busy_model) / busy_model : 0.0;
        const bool flagged = rel_dw > tolerance || rel_busy > tolerance;
        if (flagged) ++out.flagged;
        os << a.n << "," << a.k << "," << a.delta << "," << a.t_bs / a.t_d << ": " << a.t_dw << " / " << s.t_dw
           << " (" << rel_dw << ") | " << busy_model << " / " << busy_sim << " (" << rel_busy << ")"
           << (flagged ? "  FLAGGED" : "") << "\n";
    }
    os << out.flagged << " of " << rows.size() / 2 << " points exceed " << tolerance * 100.0 << "% relative difference\n";
    out.text = os.str();
    return out;
}

}  // namespace mdsdelay::harness
