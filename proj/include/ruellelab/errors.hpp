#pragma once

#include <stdexcept>
#include <string>

namespace ruellelab {

// Invalid inputs: bad model files, out-of-range parameters, violated
// preconditions. CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures of numerical procedures on valid inputs: non-convergence,
// certificate failure, fits without signal. CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ruellelab
