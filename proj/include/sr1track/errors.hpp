#pragma once

#include <stdexcept>
#include <string>

namespace sr1 {

enum class errc {
  invalid_argument,
  dimension_mismatch,
  singular_matrix,
  no_convergence,
  degenerate_direction,
  not_in_span,
  infeasible,
  io,
};

/// Library-wide exception carrying a machine-readable kind next to the message.
class error : public std::runtime_error {
public:
  error(errc kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  errc kind() const noexcept { return kind_; }

private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& message) {
  throw error(kind, message);
}

}  // namespace sr1
