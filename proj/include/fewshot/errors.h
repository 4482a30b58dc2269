#ifndef FEWSHOT_ERRORS_H_
#define FEWSHOT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fewshot {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed an argument outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input file is missing a required column or is otherwise malformed as a
// whole.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A single data row could not be admitted. `row()` is the 1-based data row
// number (header excluded).
class RowError : public Error {
 public:
  RowError(size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  size_t row() const { return row_; }

 private:
  size_t row_;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

// Numerical precondition violated (zero-norm vector, non-finite value).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Model container errors. Each corruption mode has its own type.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};
class BadMagicError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class UnsupportedVersionError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class TruncatedError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};
class ArraySizeError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

}  // namespace fewshot

#endif  // FEWSHOT_ERRORS_H_
