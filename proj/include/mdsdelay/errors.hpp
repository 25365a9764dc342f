#pragma once

#include <stdexcept>
#include <string>

namespace mdsdelay {

// Parameter or configuration value outside its documented domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A closed form produced a result that is not a probability distribution
// within tolerance (typically cancellation in the alternating-sign sums).
class NumericalInstability : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The download outcomes failed to partition the sample space.
class ModelInconsistency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Event-loop invariant broken (negative population, orphan event, ...).
class SimulationFault : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mdsdelay
