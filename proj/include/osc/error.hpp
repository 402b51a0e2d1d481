#pragma once

#include <stdexcept>
#include <string>

namespace osc {

enum class ErrorKind {
  invalid_flavor,
  missing_truncation,
  smoothness,
  invalid_mesh,
  capability,
  invalid_smoothness,
  degenerate_space,
  conditioning,
  band,
  profile,
  accuracy,
  hypothesis_violation,
  span,
  config,
  invalid_argument,
};

const char *to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace osc
