#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace decodeq {

// Only the engine (mt19937_64) comes from <random>; the distribution
// transforms are written out so draws are identical across standard
// library implementations.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed of a named sub-stream. Each stochastic feature owns its own stream so
// toggling one does not shift the draws of another.
constexpr std::uint64_t stream_seed(std::uint64_t run_seed,
                                    std::string_view name) {
  return splitmix64(run_seed ^ fnv1a(name));
}

namespace streams {
inline constexpr std::string_view kArrivals = "arrivals";
inline constexpr std::string_view kWeights = "weights";
inline constexpr std::string_view kJitter = "jitter";
}  // namespace streams

// 53-bit uniform in [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based uniform: the draw for `key` does not depend on how many
// other keys were drawn before it.
constexpr double keyed_uniform(std::uint64_t stream, std::uint64_t key) {
  return to_unit(splitmix64(stream ^ splitmix64(key)));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return to_unit(engine_()); }

  // Exponential variate with the given mean.
  double exponential(double mean) { return -std::log1p(-uniform()) * mean; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace decodeq
