#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>

#include "decodeq/errors.hpp"
#include "decodeq/time.hpp"
#include "decodeq/workload.hpp"

namespace decodeq {

// Compute/memory split of one job's service demand. `total` already has the
// cutoff applied; `compute` and `memory` are the uncut components.
struct ServiceBreakdown {
  Nanos compute = 0;
  Nanos memory = 0;
  Nanos total = 0;
  bool cutoff_hit = false;

  bool operator==(const ServiceBreakdown&) const = default;
};

// ---------------------------------------------------------------------------
// Traffic model: persistent state that spills past the on-chip budget is
// re-read and re-written from off-chip memory every iteration.

struct TrafficModelParams {
  std::uint64_t iterations = 10;
  double rw_amplification = 2.0;
  double bandwidth_bytes_per_s = 64e9;
  Nanos compute_floor = 500;
  Bytes sram_budget = 0;
  Bytes footprint = 0;  // aligned B_state, filled in from the code

  bool operator==(const TrafficModelParams&) const = default;
};

inline void validate(const TrafficModelParams& p) {
  detail::require(p.iterations >= 1, "traffic: iterations must be >= 1");
  detail::require(p.rw_amplification > 0, "traffic: rw_amplification must be > 0");
  detail::require(p.bandwidth_bytes_per_s > 0, "traffic: bandwidth must be > 0");
  detail::require(p.compute_floor >= 0, "traffic: compute_floor must be >= 0");
}

constexpr Bytes excess_bytes(Bytes b_state, Bytes b_sram) {
  return b_state > b_sram ? b_state - b_sram : 0;
}

struct OffchipTraffic {
  double per_iter = 0.0;
  double total = 0.0;
  bool operator==(const OffchipTraffic&) const = default;
};

inline OffchipTraffic offchip_traffic(Bytes excess, double rho,
                                      std::uint64_t iterations) {
  const double per_iter = rho * static_cast<double>(excess);
  return {per_iter, static_cast<double>(iterations) * per_iter};
}

inline Nanos mem_time(double total_bytes, double bandwidth_bytes_per_s) {
  detail::require(bandwidth_bytes_per_s > 0, "mem_time: bandwidth must be > 0");
  return round_ns(total_bytes * 1e9 / bandwidth_bytes_per_s);
}

inline OffchipTraffic traffic_of(const TrafficModelParams& p) {
  return offchip_traffic(excess_bytes(p.footprint, p.sram_budget),
                         p.rw_amplification, p.iterations);
}

inline Nanos traffic_memory_time(const TrafficModelParams& p) {
  return mem_time(traffic_of(p).total, p.bandwidth_bytes_per_s);
}

inline ServiceBreakdown tm_service(const TrafficModelParams& p) {
  const Nanos memory = traffic_memory_time(p);
  return {p.compute_floor, memory, p.compute_floor + memory, false};
}

// ---------------------------------------------------------------------------
// Workload model: compute grows linearly with the window's event weight.

struct WorkloadModelParams {
  Nanos base = us(10);
  Nanos alpha = us(1);  // per weight unit
  std::optional<Nanos> cap;

  bool operator==(const WorkloadModelParams&) const = default;
};

inline void validate(const WorkloadModelParams& p) {
  detail::require(p.base >= 0 && p.alpha >= 0,
                  "workload: base and alpha must be >= 0");
  detail::require(!p.cap || *p.cap > p.base, "workload: cap must exceed base");
}

constexpr Nanos wm_compute(std::uint32_t weight, const WorkloadModelParams& p) {
  const Nanos t = p.base + p.alpha * static_cast<Nanos>(weight);
  return p.cap ? std::min(*p.cap, t) : t;
}

// ---------------------------------------------------------------------------
// Composite hardware model.

// Compute from a fixed work budget at a fixed compute rate.
struct WorkBudgetCompute {
  Nanos base = 0;
  double work_units = 0.0;
  double rate_units_per_s = 1.0;
  bool operator==(const WorkBudgetCompute&) const = default;
};

enum class Combine { Sum, Max };
enum class JitterTarget { Compute, Total };

struct JitterParams {
  double shape = 2.0;
  double truncation = 50.0;
  JitterTarget target = JitterTarget::Compute;
  bool operator==(const JitterParams&) const = default;
};

struct ChmParams {
  std::variant<WorkloadModelParams, WorkBudgetCompute> compute;
  TrafficModelParams memory;
  Combine combine = Combine::Max;
  std::optional<JitterParams> jitter;

  bool operator==(const ChmParams&) const = default;
};

inline void validate(const JitterParams& j) {
  detail::require(j.shape > 1.0, "jitter: shape must be > 1");
  detail::require(j.truncation >= 1.0, "jitter: truncation must be >= 1");
}

inline void validate(const ChmParams& p) {
  if (const auto* wm = std::get_if<WorkloadModelParams>(&p.compute)) {
    validate(*wm);
  } else {
    const auto& wb = std::get<WorkBudgetCompute>(p.compute);
    detail::require(wb.rate_units_per_s > 0, "composite: compute_rate must be > 0");
    detail::require(wb.base >= 0 && wb.work_units >= 0,
                    "composite: base and work budget must be >= 0");
  }
  validate(p.memory);
  if (p.jitter) validate(*p.jitter);
}

// Truncated Pareto multiplier with minimum 1, via inverse CDF.
inline double sample_jitter(double u, double shape, double truncation) {
  return std::min(truncation, std::pow(1.0 - u, -1.0 / shape));
}

inline Nanos scale(Nanos t, double factor) {
  return round_ns(static_cast<double>(t) * factor);
}

inline ServiceBreakdown chm_service(const Job& job, const ChmParams& p,
                                    std::optional<double> jitter_factor) {
  Nanos compute = 0;
  if (const auto* wm = std::get_if<WorkloadModelParams>(&p.compute)) {
    compute = wm_compute(job.weight, *wm);
  } else {
    const auto& wb = std::get<WorkBudgetCompute>(p.compute);
    compute = wb.base + seconds_to_ns(wb.work_units / wb.rate_units_per_s);
  }
  const Nanos memory = traffic_memory_time(p.memory);
  const bool jitter_on = p.jitter && jitter_factor;
  if (jitter_on && p.jitter->target == JitterTarget::Compute)
    compute = scale(compute, *jitter_factor);
  Nanos total = p.combine == Combine::Sum ? compute + memory
                                          : std::max(compute, memory);
  if (jitter_on && p.jitter->target == JitterTarget::Total)
    total = scale(total, *jitter_factor);
  return {compute, memory, total, false};
}

// ---------------------------------------------------------------------------

struct FixedService {
  Nanos service = us(20);
  bool operator==(const FixedService&) const = default;
};

using ServiceModel =
    std::variant<FixedService, TrafficModelParams, WorkloadModelParams, ChmParams>;

inline void validate(const ServiceModel& model) {
  std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, FixedService>)
          detail::require(m.service > 0, "fixed: service must be > 0");
        else
          validate(m);
      },
      model);
}

inline bool uses_jitter(const ServiceModel& model) {
  const auto* chm = std::get_if<ChmParams>(&model);
  return chm && chm->jitter.has_value();
}

// Total off-chip bytes moved per job, when the model has a memory tier.
inline std::optional<double> offchip_bytes_per_job(const ServiceModel& model) {
  if (const auto* tm = std::get_if<TrafficModelParams>(&model))
    return traffic_of(*tm).total;
  if (const auto* chm = std::get_if<ChmParams>(&model))
    return traffic_of(chm->memory).total;
  return std::nullopt;
}

// Uncut service breakdown for a job.
inline ServiceBreakdown evaluate_service(const Job& job, const ServiceModel& model,
                                         std::optional<double> jitter_factor) {
  return std::visit(
      [&](const auto& m) -> ServiceBreakdown {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedService>) {
          return {m.service, 0, m.service, false};
        } else if constexpr (std::is_same_v<T, TrafficModelParams>) {
          return tm_service(m);
        } else if constexpr (std::is_same_v<T, WorkloadModelParams>) {
          const Nanos c = wm_compute(job.weight, m);
          return {c, 0, c, false};
        } else {
          return chm_service(job, m, jitter_factor);
        }
      },
      model);
}

struct CutoffResult {
  Nanos time = 0;
  bool hit = false;
  bool operator==(const CutoffResult&) const = default;
};

constexpr CutoffResult apply_cutoff(Nanos total, std::optional<Nanos> budget) {
  if (!budget) return {total, false};
  return {std::min(total, *budget), total >= *budget};
}

inline ServiceBreakdown with_cutoff(ServiceBreakdown s, std::optional<Nanos> budget) {
  const auto r = apply_cutoff(s.total, budget);
  s.total = r.time;
  s.cutoff_hit = r.hit;
  return s;
}

}  // namespace decodeq
