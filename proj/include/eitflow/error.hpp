#ifndef EITFLOW_ERROR_HPP
#define EITFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eitflow {

enum class ErrorKind {
  validation,
  degenerate_parameters,
  convergence_failure,
  stiffness,
  bracket_too_small,
  unidentifiable,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::degenerate_parameters: return "degenerate_parameters";
    case ErrorKind::convergence_failure: return "convergence_failure";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::bracket_too_small: return "bracket_too_small";
    case ErrorKind::unidentifiable: return "unidentifiable";
  }
  return "unknown";
}

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

  /// Process exit code used by the command-line tool: 2 for bad input, 3 for numerical failure.
  int exit_code() const noexcept { return kind_ == ErrorKind::validation ? 2 : 3; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class DegenerateParameters : public Error {
 public:
  explicit DegenerateParameters(const std::string& what)
      : Error(ErrorKind::degenerate_parameters, what) {}
};

/// Adaptive quadrature ran out of nodes. Carries the best estimate it had.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double best_magnitude, double achieved_error,
                     double target_error)
      : Error(ErrorKind::convergence_failure, what),
        best_magnitude(best_magnitude),
        achieved_error(achieved_error),
        target_error(target_error) {}
  double best_magnitude;
  double achieved_error;
  double target_error;
};

class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double z, double step)
      : Error(ErrorKind::stiffness, what), z(z), step(step) {}
  double z;
  double step;
};

class BracketTooSmall : public Error {
 public:
  explicit BracketTooSmall(const std::string& what) : Error(ErrorKind::bracket_too_small, what) {}
};

class Unidentifiable : public Error {
 public:
  explicit Unidentifiable(const std::string& what) : Error(ErrorKind::unidentifiable, what) {}
};

}  // namespace eitflow

#endif
