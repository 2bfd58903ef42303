#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trigcm {

// Base for every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Tensor or point-set shapes that do not agree.
class ShapeError : public Error {
   public:
    using Error::Error;
};

// A value outside the domain of an operation (time out of range, odd
// embedding width, degenerate cloud, ...).
class DomainError : public Error {
   public:
    using Error::Error;
};

// File-system or parse failure. `line()` is 0 when not tied to a line.
class IoError : public Error {
   public:
    IoError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
    std::size_t line() const { return line_; }

   private:
    std::size_t line_;
};

// Malformed binary payload (bad magic, truncation).
class FormatError : public IoError {
   public:
    using IoError::IoError;
};

// Well-formed file written by an incompatible format version.
class VersionError : public FormatError {
   public:
    using FormatError::FormatError;
};

// Training diverged (non-finite loss).
class TrainingError : public Error {
   public:
    using Error::Error;
};

}  // namespace trigcm
