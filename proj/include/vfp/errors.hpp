#pragma once
// Failure types shared by the grid and particle simulators.  Both carry
// enough context for a caller (or the command-line tool) to report what
// happened and, for step-size problems, what would have been admissible.

#include <stdexcept>
#include <string>

namespace vfp {

/// Transport CFL violation; carries the largest admissible step.
class CflError : public std::runtime_error {
public:
    CflError(double requested, double admissible)
        : std::runtime_error("transport CFL violated: dt = " + std::to_string(requested) +
                             " exceeds admissible " + std::to_string(admissible)),
          admissible_dt(admissible) {}
    double admissible_dt;
};

/// Non-finite values appeared in the evolving state.
class BlowupError : public std::runtime_error {
public:
    explicit BlowupError(double t)
        : std::runtime_error("solution lost finiteness at t = " + std::to_string(t)), time(t) {}
    double time;
};

}  // namespace vfp
