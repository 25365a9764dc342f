#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mdsdelay {

/// Probability mass function over the integers support_offset .. support_offset + size - 1.
class Pmf {
public:
    static constexpr double kMassTolerance = 1e-9;

    Pmf() = default;

    /// Takes masses as-is after checking them. Throws NumericalInstability when a
    /// mass is outside [0,1] or the total differs from 1 by more than kMassTolerance.
    Pmf(int support_offset, std::vector<double> masses);

    int support_offset() const { return offset_; }
    std::size_t size() const { return masses_.size(); }
    std::span<const double> masses() const { return masses_; }

    /// Mass at integer value v; zero outside the support.
    double operator[](int v) const;

    double total() const;
    double mean() const;

private:
    int offset_ = 0;
    std::vector<double> masses_;
};

/// Rounding tolerance policy for computed probabilities: values within 1e-12 of
/// [0,1] are clamped onto it, anything farther is rejected.
inline constexpr double kClampSlack = 1e-12;

/// Returns the clamped probability, or throws NumericalInstability naming `what`.
double clamp_probability(double p, const char* what);

}  // namespace mdsdelay
