#pragma once

#include <stdexcept>
#include <string>

namespace obsmix {

/// Numeric-domain failure: invalid arguments to a formula, out-of-range
/// targets, non-finite intermediate values.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A macrostate label that does not fit the box geometry.
class InvalidLabel : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Entropy target outside the attainable range of a spectrum.
class OutOfRange : public DomainError {
  public:
    OutOfRange(const std::string &what, double target) : DomainError(what), target_(target) {}
    [[nodiscard]] double target() const noexcept { return target_; }

  private:
    double target_;
};

/// Spectrum with a single level: the entropy is constant and no temperature exists.
class Degenerate : public DomainError {
  public:
    using DomainError::DomainError;
};

/// Malformed or inconsistent user configuration.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace obsmix
