#pragma once

#include <stdexcept>
#include <string>

namespace elspot {

inline constexpr const char* kVersion = "0.1.0";

// Bad inputs: malformed files, schema violations, inconsistent series.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver breakdowns: non-convergence, loss of positive definiteness, etc.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace elspot
