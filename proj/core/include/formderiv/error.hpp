#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace formderiv {

// Errors caused by the input domain (bad formula text, inapplicable rule,
// overflowing encoding, ...). The CLI maps these to exit code 2.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something that must never happen did happen. CLI exit code 3.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class SyntaxError : public DomainError {
 public:
  SyntaxError(std::size_t position, const std::string& expected, const std::string& found)
      : DomainError("syntax error at offset " + std::to_string(position) + ": expected " + expected +
                    ", found " + found),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ArityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnknownKind : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidPath : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidRule : public DomainError {
 public:
  using DomainError::DomainError;
};

class RuleNotApplicable : public DomainError {
 public:
  using DomainError::DomainError;
};

class DuplicateId : public DomainError {
 public:
  using DomainError::DomainError;
};

class UnknownRule : public DomainError {
 public:
  using DomainError::DomainError;
};

class ValidationFailed : public DomainError {
 public:
  using DomainError::DomainError;
};

class EncodingOverflow : public DomainError {
 public:
  using DomainError::DomainError;
};

class TableMismatch : public DomainError {
 public:
  using DomainError::DomainError;
};

class NoApplicableAction : public DomainError {
 public:
  using DomainError::DomainError;
};

class EpisodeFinished : public DomainError {
 public:
  using DomainError::DomainError;
};

class EmptyDataset : public DomainError {
 public:
  using DomainError::DomainError;
};

class NotFound : public DomainError {
 public:
  using DomainError::DomainError;
};

class FormatError : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace formderiv
