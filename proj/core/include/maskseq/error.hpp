#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace maskseq {

/// Stable error categories. The numeric values are part of the public
/// surface (bindings and the CLI map them to their own codes).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDegenerateGeometry = 2,
  kDimensionMismatch = 3,
  kEmptyMask = 4,
  kParse = 5,
  kIo = 6,
  kNoTarget = 7,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the grounding parser and the file readers. `offset` is the byte
/// offset into the input (or the 1-based line number for line-oriented files,
/// see `is_line()`).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset, bool is_line = false)
      : Error(ErrorCode::kParse, format(message, offset, is_line)),
        reason_(message),
        offset_(offset),
        is_line_(is_line) {}

  const std::string& reason() const noexcept { return reason_; }
  std::size_t offset() const noexcept { return offset_; }
  bool is_line() const noexcept { return is_line_; }

 private:
  static std::string format(const std::string& message, std::size_t offset, bool is_line) {
    return message + (is_line ? " (line " : " (at byte ") + std::to_string(offset) + ")";
  }

  std::string reason_;
  std::size_t offset_;
  bool is_line_;
};

}  // namespace maskseq
