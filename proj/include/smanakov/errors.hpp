#ifndef SMANAKOV_ERRORS_HPP
#define SMANAKOV_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace smanakov {

/// Broad failure classes; the CLI maps these onto exit codes.
enum class ErrorCategory { Config, Numerical, Usage };

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, std::string kind, const std::string& what)
      : std::runtime_error(what), category_(category), kind_(std::move(kind)) {}

  ErrorCategory category() const noexcept { return category_; }
  /// Short machine-readable name, e.g. "SingularPivot".
  const std::string& kind() const noexcept { return kind_; }

private:
  ErrorCategory category_;
  std::string kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string kind = "ConfigError")
      : Error(ErrorCategory::Config, std::move(kind), what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what, std::string kind = "NumericalFailure")
      : Error(ErrorCategory::Numerical, std::move(kind), what) {}
};

class NonDivisibleDomain : public ConfigError {
public:
  explicit NonDivisibleDomain(const std::string& what) : ConfigError(what, "NonDivisibleDomain") {}
};

class DegenerateGrid : public ConfigError {
public:
  explicit DegenerateGrid(const std::string& what) : ConfigError(what, "DegenerateGrid") {}
};

class InvalidRadius : public ConfigError {
public:
  explicit InvalidRadius(const std::string& what) : ConfigError(what, "InvalidRadius") {}
};

class BadFactor : public ConfigError {
public:
  explicit BadFactor(const std::string& what) : ConfigError(what, "BadFactor") {}
};

class BackendBoundaryMismatch : public ConfigError {
public:
  explicit BackendBoundaryMismatch(const std::string& what)
      : ConfigError(what, "BackendBoundaryMismatch") {}
};

class UnsupportedBackend : public ConfigError {
public:
  explicit UnsupportedBackend(const std::string& what) : ConfigError(what, "UnsupportedBackend") {}
};

class DimensionMismatch : public ConfigError {
public:
  explicit DimensionMismatch(const std::string& what) : ConfigError(what, "DimensionMismatch") {}
};

class IncompatibleTimelines : public ConfigError {
public:
  explicit IncompatibleTimelines(const std::string& what)
      : ConfigError(what, "IncompatibleTimelines") {}
};

class DegenerateFit : public NumericalError {
public:
  explicit DegenerateFit(const std::string& what) : NumericalError(what, "DegenerateFit") {}
};

class SingularPivot : public NumericalError {
public:
  explicit SingularPivot(const std::string& what) : NumericalError(what, "SingularPivot") {}
};

class NoConvergence : public NumericalError {
public:
  NoConvergence(int iterations, double residual)
      : NumericalError("fixed-point iteration did not converge after " +
                           std::to_string(iterations) + " iterations (residual " +
                           std::to_string(residual) + ")",
                       "NoConvergence"),
        iterations_(iterations), residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

private:
  int iterations_;
  double residual_;
};

class BlowUp : public NumericalError {
public:
  BlowUp(std::size_t step, double h1)
      : NumericalError("H1 norm " + std::to_string(h1) + " exceeded the blow-up threshold at step " +
                           std::to_string(step),
                       "BlowUp"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

/// Wraps a scheme failure with the index of the step that raised it.
class StepFailure : public NumericalError {
public:
  StepFailure(std::size_t step, const Error& cause)
      : NumericalError("step " + std::to_string(step) + ": " + cause.kind() + ": " + cause.what(),
                       cause.kind()),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

private:
  std::size_t step_;
};

class StudyFailed : public NumericalError {
public:
  explicit StudyFailed(const std::string& what) : NumericalError(what, "StudyFailed") {}
};

} // namespace smanakov

#endif // SMANAKOV_ERRORS_HPP
