#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace psz {

enum class ErrorCategory {
  config,
  dimension,
  numeric,
  io,
  data,
  not_found,
  protocol,
};

const char* to_string(ErrorCategory category);

/// Process exit code used by the CLI for each category (0 is success).
int exit_code(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message);

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Raised when adaptation runs away: a non-finite tap or one whose magnitude
/// exceeds the divergence threshold.
class NumericError : public Error {
 public:
  NumericError(const std::string& message, std::size_t iteration,
               std::optional<std::size_t> node = std::nullopt);

  std::size_t iteration() const noexcept { return iteration_; }
  std::optional<std::size_t> node() const noexcept { return node_; }

 private:
  std::size_t iteration_;
  std::optional<std::size_t> node_;
};

[[noreturn]] void throw_error(ErrorCategory category, const std::string& message);

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) throw_error(category, message);
}

}  // namespace psz
