#pragma once

#include <stdexcept>
#include <string>

namespace rfis {

// Numeric values are shared with the C API (rfis_status).
enum class ErrorCode : int {
  invalid_argument = 1,
  invalid_dimension = 2,
  empty_input = 3,
  degenerate_weights = 4,
  overflow = 5,
  degenerate_q = 6,
  envelope = 7,
  outside_support = 8,
  grid_too_large = 9,
  config = 10,
  io = 11,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for failures caused by the numbers rather than by the caller's input.
  bool is_numerical() const noexcept {
    return code_ == ErrorCode::overflow || code_ == ErrorCode::degenerate_q ||
           code_ == ErrorCode::envelope || code_ == ErrorCode::outside_support;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace rfis
