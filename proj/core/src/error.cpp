#include "econoscale/error.hpp"

namespace econoscale {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::no_tail_detected: return "no_tail_detected";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace econoscale
