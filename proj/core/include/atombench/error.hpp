#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atombench {

// Coarse classification used by the CLI to pick an exit status.
enum class ErrorKind { Usage, Data, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Stable machine-readable identifier, e.g. "DegenerateCell".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

#define ATOMBENCH_DEFINE_ERROR(Name, Kind)                    \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& what)                    \
        : Error(ErrorKind::Kind, #Name, what) {}              \
  };

ATOMBENCH_DEFINE_ERROR(DegenerateCell, Data)
ATOMBENCH_DEFINE_ERROR(InvalidCrystal, Data)
ATOMBENCH_DEFINE_ERROR(UnsupportedFormat, Data)
ATOMBENCH_DEFINE_ERROR(SchemaError, Data)
ATOMBENCH_DEFINE_ERROR(ChecksumMismatch, Data)
ATOMBENCH_DEFINE_ERROR(EmptyDataset, Data)
ATOMBENCH_DEFINE_ERROR(EmptyInput, Data)
ATOMBENCH_DEFINE_ERROR(EdgeMismatch, Data)
ATOMBENCH_DEFINE_ERROR(SpeciesMismatch, Data)
ATOMBENCH_DEFINE_ERROR(NoEvaluablePairs, Data)
ATOMBENCH_DEFINE_ERROR(SpecError, Data)
ATOMBENCH_DEFINE_ERROR(InvalidArgument, Usage)
ATOMBENCH_DEFINE_ERROR(IoError, Io)
ATOMBENCH_DEFINE_ERROR(NetworkError, Io)

#undef ATOMBENCH_DEFINE_ERROR

// Parse failures carry the 1-based line number of the offending line
// (0 when the failure is not tied to a line).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorKind::Data, "ParseError",
              line ? "line " + std::to_string(line) + ": " + reason : reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace atombench
