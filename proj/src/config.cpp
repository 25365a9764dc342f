#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mdsdelay/errors.hpp"
#include "mdsdelay/harness.hpp"

namespace mdsdelay::harness {

namespace {

[[noreturn]] void reject(const std::string& key, const std::string& constraint) {
    throw InvalidParameter("config key '" + key + "': " + constraint);
}

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node.IsMap()) reject(where, "expected a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) reject(where.empty() ? key : where + "." + key, "unknown key");
    }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) reject(key, "expected a scalar");
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        reject(key, "cannot parse '" + node.Scalar() + "'");
    }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
    if (!node.IsSequence() || node.size() == 0) reject(key, "expected a nonempty list");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(scalar<double>(node[i], key + "[" + std::to_string(i) + "]"));
    return out;
}

CodeParams code_entry(const YAML::Node& node, const std::string& key) {
    CodeParams c;
    if (node.IsSequence() && node.size() == 2) {
        c.n = scalar<int>(node[0], key);
        c.k = scalar<int>(node[1], key);
    } else if (node.IsMap()) {
        check_keys(node, key, {"n", "k"});
        if (!node["n"] || !node["k"]) reject(key, "needs both n and k");
        c.n = scalar<int>(node["n"], key + ".n");
        c.k = scalar<int>(node["k"], key + ".k");
    } else {
        reject(key, "expected [n, k] or {n:, k:}");
    }
    try {
        c.validate();
    } catch (const InvalidParameter& e) {
        reject(key, e.what());
    }
    return c;
}

}  // namespace

SweepSpec parse_config_text(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw InvalidParameter(std::string("config is not valid YAML: ") + e.what());
    }
    SweepSpec spec;
    if (root.IsNull()) {
        spec.validate();
        return spec;
    }
    check_keys(root, "", {"system", "codes", "delta", "ratios", "engine", "simulation", "threads"});

    if (const auto sys = root["system"]) {
        check_keys(sys, "system",
                   {"expected_node_count", "departure_rate", "arrival_rate", "request_rate_per_node", "t_ref"});
        if (sys["expected_node_count"])
            spec.base.expected_node_count = scalar<double>(sys["expected_node_count"], "system.expected_node_count");
        if (sys["departure_rate"]) spec.base.departure_rate = scalar<double>(sys["departure_rate"], "system.departure_rate");
        if (sys["request_rate_per_node"])
            spec.base.request_rate_per_node = scalar<double>(sys["request_rate_per_node"], "system.request_rate_per_node");
        if (sys["t_ref"]) spec.t_ref = scalar<double>(sys["t_ref"], "system.t_ref");
        if (sys["arrival_rate"]) {
            const double lambda = scalar<double>(sys["arrival_rate"], "system.arrival_rate");
            if (lambda != spec.base.departure_rate) reject("system.arrival_rate", "must equal departure_rate");
        }
    }

    if (const auto codes = root["codes"]) {
        if (!codes.IsSequence() || codes.size() == 0) reject("codes", "expected a nonempty list");
        spec.codes.clear();
        for (std::size_t i = 0; i < codes.size(); ++i)
            spec.codes.push_back(code_entry(codes[i], "codes[" + std::to_string(i) + "]"));
    }

    if (const auto delta = root["delta"]) {
        check_keys(delta, "delta", {"values", "log_range"});
        if (delta["values"] && delta["log_range"]) reject("delta", "give either values or log_range, not both");
        if (delta["values"]) {
            spec.deltas = number_list(delta["values"], "delta.values");
        } else if (const auto lr = delta["log_range"]) {
            check_keys(lr, "delta.log_range", {"min", "max", "count"});
            if (!lr["min"] || !lr["max"] || !lr["count"]) reject("delta.log_range", "needs min, max and count");
            const double lo = scalar<double>(lr["min"], "delta.log_range.min");
            const double hi = scalar<double>(lr["max"], "delta.log_range.max");
            const int count = scalar<int>(lr["count"], "delta.log_range.count");
            if (!(lo > 0.0) || !(hi >= lo)) reject("delta.log_range", "needs 0 < min <= max");
            if (count < 1) reject("delta.log_range.count", "must be >= 1");
            spec.deltas = SweepSpec::log_grid(lo, hi, count);
        } else {
            reject("delta", "needs values or log_range");
        }
    }

    if (root["ratios"]) spec.ratios = number_list(root["ratios"], "ratios");
    if (root["engine"]) {
        try {
            spec.engine = parse_engine(scalar<std::string>(root["engine"], "engine"));
        } catch (const InvalidParameter& e) {
            reject("engine", e.what());
        }
    }
    if (root["threads"]) spec.threads = scalar<int>(root["threads"], "threads");

    if (const auto s = root["simulation"]) {
        check_keys(s, "simulation", {"mode", "request_model", "num_requests", "warmup_requests", "seed"});
        try {
            if (s["mode"]) spec.sim.mode = parse_mode(scalar<std::string>(s["mode"], "simulation.mode"));
            if (s["request_model"])
                spec.sim.request_model = parse_request_model(scalar<std::string>(s["request_model"], "simulation.request_model"));
        } catch (const InvalidParameter& e) {
            reject("simulation", e.what());
        }
        if (s["num_requests"]) spec.sim.num_requests = scalar<std::int64_t>(s["num_requests"], "simulation.num_requests");
        if (s["warmup_requests"])
            spec.sim.warmup_requests = scalar<std::int64_t>(s["warmup_requests"], "simulation.warmup_requests");
        if (s["seed"]) spec.sim.seed = scalar<std::uint64_t>(s["seed"], "simulation.seed");
    }

    spec.validate();
    return spec;
}

SweepSpec parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace mdsdelay::harness
