#pragma once

#include <stdexcept>
#include <string>

namespace decodeq {

// Rejected configuration or argument. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A simulation invariant broke. The CLI maps this to exit code 2.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// A persisted run log is truncated, corrupted or from another schema version.
struct LogFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}
inline void ensure(bool cond, const std::string& what) {
  if (!cond) throw InvariantViolation(what);
}
}  // namespace detail

}  // namespace decodeq
