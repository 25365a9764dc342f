#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "mdsdelay/errors.hpp"
#include "mdsdelay/harness.hpp"

namespace mdsdelay::harness {

namespace {

constexpr const char* kBaseColumns = "n,k,delta,t_d,t_bs,engine,eta,t_eta,p_idle,t_dw,gain";
constexpr const char* kSimColumns = ",t_dw_stderr,busy_frac,busy_frac_stderr,rel_diff";

std::string num(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
    out << content;
    out.flush();
    if (!out) throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InvalidParameter("csv column " + column + ": cannot parse '" + s + "'");
    }
}

// Deterministic "nice" tick step for a linear axis.
double nice_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    const double nice = r <= 1.0 ? 1.0 : r <= 2.0 ? 2.0 : r <= 5.0 ? 5.0 : 10.0;
    return nice * mag;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_csv(const std::vector<SweepRow>& rows) {
    const bool sim_columns = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) {
        return r.engine == Engine::Simulate || r.t_dw_stderr || r.busy_frac || r.rel_diff;
    });
    std::string out = kBaseColumns;
    if (sim_columns) out += kSimColumns;
    out += '\n';
    for (const SweepRow& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.k) + "," + num(r.delta) + "," + num(r.t_d) + "," +
               num(r.t_bs) + "," + engine_name(r.engine) + "," + num(r.eta) + "," + num(r.t_eta) + "," +
               num(r.p_idle) + "," + num(r.t_dw) + "," + num(r.gain);
        if (sim_columns)
            out += "," + opt(r.t_dw_stderr) + "," + opt(r.busy_frac) + "," + opt(r.busy_frac_stderr) + "," +
                   opt(r.rel_diff);
        out += '\n';
    }
    return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    write_file(path, format_csv(rows));
}

std::vector<SweepRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw InvalidParameter("csv is empty");
    const std::string base = kBaseColumns;
    const bool sim_columns = header == base + kSimColumns;
    if (!sim_columns && header != base) throw InvalidParameter("csv header does not match the sweep columns");
    const std::size_t width = sim_columns ? 15 : 11;

    std::vector<SweepRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != width) throw InvalidParameter("csv row has " + std::to_string(c.size()) + " cells: " + line);
        SweepRow r;
        r.n = static_cast<int>(parse_double(c[0], "n"));
        r.k = static_cast<int>(parse_double(c[1], "k"));
        r.delta = parse_double(c[2], "delta");
        r.t_d = parse_double(c[3], "t_d");
        r.t_bs = parse_double(c[4], "t_bs");
        r.engine = parse_engine(c[5]);
        r.eta = parse_double(c[6], "eta");
        r.t_eta = parse_double(c[7], "t_eta");
        r.p_idle = parse_double(c[8], "p_idle");
        r.t_dw = parse_double(c[9], "t_dw");
        r.gain = parse_double(c[10], "gain");
        if (sim_columns) {
            auto cell = [&](std::size_t i, const char* name) -> std::optional<double> {
                if (c[i].empty()) return std::nullopt;
                return parse_double(c[i], name);
            };
            r.t_dw_stderr = cell(11, "t_dw_stderr");
            r.busy_frac = cell(12, "busy_frac");
            r.busy_frac_stderr = cell(13, "busy_frac_stderr");
            r.rel_diff = cell(14, "rel_diff");
        }
        rows.push_back(r);
    }
    return rows;
}

std::string render_svg(const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw InvalidParameter("cannot plot an empty row set");
    const double ratio = rows.front().t_bs / rows.front().t_d;
    for (const SweepRow& r : rows)
        if (std::abs(r.t_bs / r.t_d - ratio) > 1e-6 * ratio)
            throw InvalidParameter("rows mix t_bs/t_d ratios; plot one ratio at a time");

    // Series keyed by (n, k, engine), kept in first-seen order.
    struct Series {
        std::string label;
        bool simulated;
        std::vector<std::pair<double, double>> points;
    };
    std::vector<Series> series;
    std::map<std::tuple<int, int, int>, std::size_t> index;
    for (const SweepRow& r : rows) {
        const auto key = std::make_tuple(r.n, r.k, static_cast<int>(r.engine));
        auto it = index.find(key);
        if (it == index.end()) {
            std::string label = "(" + std::to_string(r.n) + "," + std::to_string(r.k) + ")";
            if (r.n == 1 && r.k == 1) label += " uncoded";
            if (r.engine == Engine::Simulate) label += " sim";
            it = index.emplace(key, series.size()).first;
            series.push_back({label, r.engine == Engine::Simulate, {}});
        }
        series[it->second].points.emplace_back(r.delta, r.gain);
    }
    for (auto& s : series) std::sort(s.points.begin(), s.points.end());

    double x_lo = rows.front().delta, x_hi = x_lo, y_hi = 0.0;
    for (const SweepRow& r : rows) {
        x_lo = std::min(x_lo, r.delta);
        x_hi = std::max(x_hi, r.delta);
        y_hi = std::max(y_hi, r.gain);
    }
    double lx_lo = std::floor(std::log10(x_lo));
    double lx_hi = std::ceil(std::log10(x_hi));
    if (lx_hi <= lx_lo) lx_hi = lx_lo + 1.0;
    const double y_step = nice_step(std::max(y_hi, 1.0));
    const double y_top = std::ceil(std::max(y_hi, 1.0) / y_step) * y_step;

    const double width = 760, height = 500, left = 70, right = 190, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double d) { return left + (std::log10(d) - lx_lo) / (lx_hi - lx_lo) * pw; };
    auto sy = [&](double g) { return top + ph - g / y_top * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">Gain T_ref/T_dw, t_bs = "
       << num(ratio) << " t_d</text>\n";

    // Axes and grid.
    os << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    for (double e = lx_lo; e <= lx_hi + 1e-9; e += 1.0)
        os << "<line x1=\"" << sx(std::pow(10.0, e)) << "\" y1=\"" << top << "\" x2=\"" << sx(std::pow(10.0, e))
           << "\" y2=\"" << top + ph << "\"/>\n";
    for (double g = 0.0; g <= y_top + 1e-9 * y_top; g += y_step)
        os << "<line x1=\"" << left << "\" y1=\"" << sy(g) << "\" x2=\"" << left + pw << "\" y2=\"" << sy(g) << "\"/>\n";
    os << "</g>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double e = lx_lo; e <= lx_hi + 1e-9; e += 1.0)
        os << "<text x=\"" << sx(std::pow(10.0, e)) << "\" y=\"" << top + ph + 18
           << "\" text-anchor=\"middle\">1e" << static_cast<int>(e) << "</text>\n";
    for (double g = 0.0; g <= y_top + 1e-9 * y_top; g += y_step)
        os << "<text x=\"" << left - 6 << "\" y=\"" << sy(g) + 4 << "\" text-anchor=\"end\">" << num(g) << "</text>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 18
       << "\" text-anchor=\"middle\">repair interval Delta (t.u.)</text>\n";
    os << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << top + ph / 2
       << ")\">T_ref / T_dw</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const Series& s = series[i];
        const char* color = palette[i % (sizeof(palette) / sizeof(palette[0]))];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
        if (s.simulated) os << " stroke-dasharray=\"6 4\"";
        os << " points=\"";
        for (std::size_t p = 0; p < s.points.size(); ++p)
            os << (p ? " " : "") << sx(s.points[p].first) << "," << sy(s.points[p].second);
        os << "\"/>\n";
        for (const auto& [d, g] : s.points)
            os << "<circle cx=\"" << sx(d) << "\" cy=\"" << sy(g) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";

        const double ly = top + 14 + 18.0 * static_cast<double>(i);
        const double lx = left + pw + 16;
        os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24 << "\" y2=\"" << ly << "\" stroke=\""
           << color << "\" stroke-width=\"2\"" << (s.simulated ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
        os << "<text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_svg(const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    write_file(path, render_svg(rows));
}

}  // namespace mdsdelay::harness
