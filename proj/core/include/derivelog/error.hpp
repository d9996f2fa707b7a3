#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace derivelog {

/// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: files, flags, out-of-range ids.
class InputError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public InputError {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : InputError(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class TangleUnsupported : public Error {
 public:
  TangleUnsupported() : Error("next-normal form is undefined for formulas containing <*>") {}
};

class MissingFunction : public Error {
 public:
  MissingFunction() : Error("frame has no transition function") {}
};

class SubsetCapExceeded : public Error {
 public:
  SubsetCapExceeded(std::size_t points, std::size_t cap)
      : Error("exhaustive subset check over " + std::to_string(points) +
              " points exceeds the cap of " + std::to_string(cap)) {}
};

class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

class ClassViolation : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

/// Raised by the search module when its budget runs out; carries how far the
/// search got.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, std::size_t completed_size,
                 std::size_t frames_scanned)
      : Error(what), completed_size_(completed_size), frames_scanned_(frames_scanned) {}

  /// Largest structure size whose scan finished before the budget ran out.
  std::size_t completed_size() const { return completed_size_; }
  std::size_t frames_scanned() const { return frames_scanned_; }

 private:
  std::size_t completed_size_;
  std::size_t frames_scanned_;
};

}  // namespace derivelog
