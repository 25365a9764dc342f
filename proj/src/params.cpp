#include "mdsdelay/params.hpp"

#include <cmath>
#include <sstream>

#include "mdsdelay/errors.hpp"

namespace mdsdelay {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidParameter(what);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void SystemParams::validate() const {
    require(finite_positive(expected_node_count), "expected_node_count must be finite and > 0");
    require(finite_positive(departure_rate), "departure_rate must be finite and > 0");
    require(std::isfinite(request_rate_per_node) && request_rate_per_node >= 0.0,
            "request_rate_per_node must be finite and >= 0");
    require(finite_positive(d2d_symbol_time), "d2d_symbol_time must be finite and > 0");
    require(finite_positive(bs_symbol_time), "bs_symbol_time must be finite and > 0");
    require(finite_positive(repair_interval), "repair_interval must be finite and > 0");
}

std::vector<std::string> SystemParams::warnings() const {
    std::vector<std::string> out;
    if (bs_symbol_time < d2d_symbol_time) {
        std::ostringstream os;
        os << "bs_symbol_time (" << bs_symbol_time << ") < d2d_symbol_time (" << d2d_symbol_time
           << "): BS is faster than D2D, outside the modeling premise";
        out.push_back(os.str());
    }
    return out;
}

void CodeParams::validate() const {
    if (n < 1 || k < 1 || k > n) {
        std::ostringstream os;
        os << "code (" << n << "," << k << ") violates 1 <= k <= n";
        throw InvalidParameter(os.str());
    }
}

std::vector<std::string> CodeParams::warnings(const SystemParams& params) const {
    std::vector<std::string> out;
    if (n > params.expected_node_count / 3.0) {
        std::ostringstream os;
        os << "n=" << n << " exceeds M/3=" << params.expected_node_count / 3.0
           << "; the n << M assumption is weak";
        out.push_back(os.str());
    }
    return out;
}

}  // namespace mdsdelay
