// Error types shared across the solver library.

#ifndef THERMISTOR_ERRORS_HPP
#define THERMISTOR_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace thermistor {

// Bad argument to a library operation (grid mismatch, negative input, ...).
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& msg) : std::invalid_argument(msg) {}
};

// An iterative solver ran out of iterations. Carries the last residual so
// callers can report how far the solve got.
class NonconvergenceError : public std::runtime_error {
public:
    NonconvergenceError(const std::string& msg, double last_residual, int iterations)
        : std::runtime_error(msg), last_residual(last_residual), iterations(iterations) {}
    double last_residual;
    int iterations;
};

// Evaluation outside the range of a tabulated model.
class ExtrapolationError : public std::runtime_error {
public:
    explicit ExtrapolationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration rejected. Collects every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations(std::move(violations)) {}
    std::vector<std::string> violations;

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "config rejected:";
        for (const auto& s : v) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }
};

// A monitored runtime invariant failed (strict mode only).
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace thermistor

#endif
