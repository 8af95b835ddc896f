#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "decodeq/errors.hpp"
#include "decodeq/rng.hpp"
#include "decodeq/time.hpp"

namespace decodeq {

struct PoissonArrivals {
  double rate_per_s = 0.0;
  bool operator==(const PoissonArrivals&) const = default;
};

// Poisson arrivals during fixed "on" windows, silence during "off" windows.
// Windows alternate deterministically starting with "on" at t = 0.
struct BurstyOnOffArrivals {
  double rate_on_per_s = 0.0;
  Nanos on_duration = us(6'500);
  Nanos off_duration = ms(5);
  bool operator==(const BurstyOnOffArrivals&) const = default;
};

struct DeterministicArrivals {
  Nanos interarrival = 0;
  bool operator==(const DeterministicArrivals&) const = default;
};

using ArrivalProcess =
    std::variant<PoissonArrivals, BurstyOnOffArrivals, DeterministicArrivals>;

inline void validate(const ArrivalProcess& process) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PoissonArrivals>) {
          detail::require(p.rate_per_s > 0, "poisson: rate must be > 0");
        } else if constexpr (std::is_same_v<T, BurstyOnOffArrivals>) {
          detail::require(p.rate_on_per_s > 0, "bursty: rate_on must be > 0");
          detail::require(p.on_duration > 0 && p.off_duration > 0,
                          "bursty: on/off durations must be > 0");
        } else {
          detail::require(p.interarrival > 0,
                          "deterministic: interarrival must be > 0");
        }
      },
      process);
}

// n_jobs nondecreasing arrival times. The first arrival lands one
// interarrival (or one exponential gap) after t = 0.
inline std::vector<Nanos> generate_arrivals(const ArrivalProcess& process,
                                            std::size_t n_jobs,
                                            std::uint64_t seed) {
  validate(process);
  std::vector<Nanos> times;
  times.reserve(n_jobs);
  RandomStream rng(seed);

  if (const auto* det = std::get_if<DeterministicArrivals>(&process)) {
    for (std::size_t i = 1; i <= n_jobs; ++i)
      times.push_back(static_cast<Nanos>(i) * det->interarrival);
  } else if (const auto* poi = std::get_if<PoissonArrivals>(&process)) {
    const double mean_ns = 1e9 / poi->rate_per_s;
    Nanos t = 0;
    while (times.size() < n_jobs) {
      t += round_ns(rng.exponential(mean_ns));
      times.push_back(t);
    }
  } else {
    const auto& b = std::get<BurstyOnOffArrivals>(process);
    const double mean_ns = 1e9 / b.rate_on_per_s;
    const Nanos period = b.on_duration + b.off_duration;
    Nanos window_start = 0;
    Nanos t = 0;
    while (times.size() < n_jobs) {
      t += round_ns(rng.exponential(mean_ns));
      if (t >= window_start + b.on_duration) {
        // Memoryless: restart the clock at the next on window.
        window_start += period;
        t = window_start;
        continue;
      }
      times.push_back(t);
    }
  }
  return times;
}

// Per-window detector-event weight proxy: each of `checks` checks fires
// independently with `firing_prob` in each of `rounds` rounds.
struct WeightModel {
  std::uint64_t checks = 0;
  std::uint64_t rounds = 10;
  double firing_prob = 0.01;
  bool operator==(const WeightModel&) const = default;
};

inline void validate(const WeightModel& m) {
  detail::require(m.rounds >= 1, "weights: rounds must be >= 1");
  detail::require(m.firing_prob >= 0.0 && m.firing_prob <= 1.0,
                  "weights: firing_prob must lie in [0, 1]");
}

// Binomial(checks * rounds, firing_prob). One uniform per draw via CDF
// inversion; falls back to summed Bernoulli trials when P(0) underflows.
inline std::uint32_t sample_weight(const WeightModel& m, RandomStream& rng) {
  const std::uint64_t trials = m.checks * m.rounds;
  const double p = m.firing_prob;
  if (p <= 0.0 || trials == 0) return 0;
  if (p >= 1.0) return static_cast<std::uint32_t>(trials);
  double pmf = std::pow(1.0 - p, static_cast<double>(trials));
  if (pmf < 1e-280) {
    std::uint32_t w = 0;
    for (std::uint64_t t = 0; t < trials; ++t) w += rng.bernoulli(p);
    return w;
  }
  const double u = rng.uniform();
  const double odds = p / (1.0 - p);
  double cdf = pmf;
  std::uint64_t k = 0;
  while (u >= cdf && k < trials) {
    pmf *= static_cast<double>(trials - k) / static_cast<double>(k + 1) * odds;
    ++k;
    cdf += pmf;
  }
  return static_cast<std::uint32_t>(k);
}

inline std::vector<std::uint32_t> sample_weights(const WeightModel& m,
                                                 std::size_t n,
                                                 std::uint64_t seed) {
  validate(m);
  RandomStream rng(seed);
  std::vector<std::uint32_t> out(n);
  for (auto& w : out) w = sample_weight(m, rng);
  return out;
}

using JobId = std::uint64_t;

enum class JobKind { Primary, Rescue };

struct Job {
  JobId id = 0;
  JobKind kind = JobKind::Primary;
  std::optional<JobId> parent;
  Nanos arrival = 0;
  Nanos deadline = 0;
  std::uint32_t weight = 0;  // primary only

  bool operator==(const Job&) const = default;
};

// Primary jobs with absolute deadline arrival + slack, ids in arrival order.
inline std::vector<Job> make_primary_jobs(std::span<const Nanos> arrivals,
                                          Nanos slack,
                                          std::span<const std::uint32_t> weights) {
  detail::require(arrivals.size() == weights.size(),
                  "make_primary_jobs: arrivals and weights differ in length");
  detail::require(slack > 0, "make_primary_jobs: slack must be > 0");
  std::vector<Job> jobs;
  jobs.reserve(arrivals.size());
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    detail::require(i == 0 || arrivals[i - 1] <= arrivals[i],
                    "make_primary_jobs: arrivals must be nondecreasing");
    jobs.push_back(Job{i, JobKind::Primary, std::nullopt, arrivals[i],
                       arrivals[i] + slack, weights[i]});
  }
  return jobs;
}

}  // namespace decodeq
