#include "mdsdelay/pmf.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mdsdelay/errors.hpp"

namespace mdsdelay {

Pmf::Pmf(int support_offset, std::vector<double> masses)
    : offset_(support_offset), masses_(std::move(masses)) {
    if (masses_.empty()) throw NumericalInstability("pmf has empty support");
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        const double m = masses_[i];
        if (!std::isfinite(m) || m < -kMassTolerance || m > 1.0 + kMassTolerance) {
            std::ostringstream os;
            os << "pmf mass at " << offset_ + static_cast<int>(i) << " is " << m;
            throw NumericalInstability(os.str());
        }
    }
    const double s = total();
    if (std::abs(s - 1.0) > kMassTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "pmf sums to " << s;
        throw NumericalInstability(os.str());
    }
}

double Pmf::operator[](int v) const {
    const int i = v - offset_;
    if (i < 0 || i >= static_cast<int>(masses_.size())) return 0.0;
    return masses_[static_cast<std::size_t>(i)];
}

double Pmf::total() const { return std::accumulate(masses_.begin(), masses_.end(), 0.0); }

double Pmf::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < masses_.size(); ++i) m += (offset_ + static_cast<double>(i)) * masses_[i];
    return m;
}

double clamp_probability(double p, const char* what) {
    if (p >= 0.0 && p <= 1.0) return p;
    if (p < 0.0 && p >= -kClampSlack) return 0.0;
    if (p > 1.0 && p <= 1.0 + kClampSlack) return 1.0;
    std::ostringstream os;
    os.precision(17);
    os << what << " = " << p << " is not a probability";
    throw NumericalInstability(os.str());
}

}  // namespace mdsdelay
