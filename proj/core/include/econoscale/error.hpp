#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace econoscale {

/// Failure categories surfaced by the library. The CLI maps `invalid_argument`
/// to exit code 2 and everything else to exit code 1.
enum class ErrorCode {
  invalid_argument,     // precondition / configuration violated
  parse_error,          // malformed input file
  degenerate_input,     // point mass, zero fluctuation, ...
  insufficient_data,    // too few samples / periods / tail points
  no_tail_detected,     // no acceptable power-law region
  not_converged,        // relaxation transient not completed
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::invalid_argument, message);
}

}  // namespace econoscale
