#pragma once

#include <stdexcept>
#include <string>

namespace exclusim {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Initial profile evaluated outside [0,1].
class InitializationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// step() called on a configuration without particles.
class NoEventError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A field, mesh or sample series is too coarse for the requested quantity.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mesh cell without any lattice site.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature did not reach the requested tolerance.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter combination outside the established hydrodynamic-limit cases.
class Refusal : public std::runtime_error {
 public:
  Refusal(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace exclusim
