// ttomo - exception types
#pragma once

#include <stdexcept>
#include <string>

namespace ttomo {

// base class for all toolkit errors
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// evaluation outside the admissible domain
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// iterative solver failed to converge; carries the final residual
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, double residual)
      : Error(msg + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// degenerate numerics (singular matrix etc.); carries a condition estimate
class NumericalError : public Error {
 public:
  NumericalError(const std::string& msg, double condition)
      : Error(msg + " (condition " + std::to_string(condition) + ")"), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

// configuration file problems, with a line number when known
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg, int line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg) {}
};

}  // namespace ttomo
