#include "psz/error.hpp"

namespace psz {

const char* to_string(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::dimension: return "dimension";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::io: return "io";
    case ErrorCategory::data: return "data";
    case ErrorCategory::not_found: return "not-found";
    case ErrorCategory::protocol: return "protocol";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::dimension: return 3;
    case ErrorCategory::numeric: return 4;
    case ErrorCategory::io: return 5;
    case ErrorCategory::data: return 6;
    case ErrorCategory::not_found: return 7;
    case ErrorCategory::protocol: return 8;
  }
  return 1;
}

Error::Error(ErrorCategory category, const std::string& message)
    : std::runtime_error(std::string(to_string(category)) + " error: " + message),
      category_(category) {}

NumericError::NumericError(const std::string& message, std::size_t iteration,
                           std::optional<std::size_t> node)
    : Error(ErrorCategory::numeric,
            message + " at iteration " + std::to_string(iteration) +
                (node ? " on node " + std::to_string(*node) : std::string())),
      iteration_(iteration),
      node_(node) {}

void throw_error(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace psz
