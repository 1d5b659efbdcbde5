#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace webrank {

/// Base class of every error raised by the library. The C API maps each
/// subclass onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text or spec file.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : Error(msg + " at position " + std::to_string(position)), detail_(msg), position_(position) {}
  std::size_t position() const noexcept { return position_; }
  /// The message without the position suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t position_;
};

/// Evaluation outside the domain of definition (log of a non-positive value,
/// division by zero, ...). Carries the printed offending subtree.
class DomainError : public Error {
 public:
  DomainError(const std::string& msg, std::string subtree)
      : Error(msg + ": " + subtree), subtree_(std::move(subtree)) {}
  const std::string& subtree() const noexcept { return subtree_; }

 private:
  std::string subtree_;
};

/// Fewer valid sample points than requested could be found in the box.
class InsufficientDomainError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An expression exceeded the configured node cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A web, spec file or configuration failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two web functions whose Jacobian vanishes identically on the box.
class DegeneratePairError : public ValidationError {
 public:
  DegeneratePairError(int i, int j)
      : ValidationError("web functions f" + std::to_string(i) + " and f" + std::to_string(j) +
                        " are not in general position (Jacobian vanishes identically)"),
        first_(i),
        second_(j) {}
  int first() const noexcept { return first_; }
  int second() const noexcept { return second_; }

 private:
  int first_;
  int second_;
};

/// The chart built from the first two web functions is unusable.
class ChartError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An operation was called outside its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The jet reduction left monomials outside the target basis.
class ReductionIncompleteError : public Error {
 public:
  using Error::Error;
};

/// An elimination step would divide by a coefficient that vanishes
/// identically. Carries the printed coefficient.
class VanishingCoefficientError : public Error {
 public:
  explicit VanishingCoefficientError(std::string coefficient)
      : Error("leading coefficient vanishes identically: " + coefficient), coefficient_(std::move(coefficient)) {}
  const std::string& coefficient() const noexcept { return coefficient_; }

 private:
  std::string coefficient_;
};

/// Sampled identity tests disagreed across seeds.
class IndeterminateError : public Error {
 public:
  using Error::Error;
};

}  // namespace webrank
