#pragma once

#include <cmath>
#include <cstdint>

namespace decodeq {

// Simulation time is integer nanoseconds everywhere.
using Nanos = std::int64_t;
using Bytes = std::uint64_t;

constexpr Nanos us(std::int64_t v) { return v * 1'000; }
constexpr Nanos ms(std::int64_t v) { return v * 1'000'000; }

// Round-half-up onto the nanosecond grid.
inline Nanos round_ns(double ns) {
  return static_cast<Nanos>(std::floor(ns + 0.5));
}

inline Nanos seconds_to_ns(double s) { return round_ns(s * 1e9); }

}  // namespace decodeq
