#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "decodeq/engine.hpp"
#include "decodeq/errors.hpp"
#include "decodeq/records.hpp"

namespace decodeq {

struct OutcomeCounts {
  std::uint64_t n = 0;
  std::uint64_t on_time = 0;
  std::uint64_t miss = 0;
  std::uint64_t drop = 0;
  bool operator==(const OutcomeCounts&) const = default;
};

struct Rates {
  double miss_rate = 0.0;
  double drop_rate = 0.0;
  double goodput = 0.0;
};

// Rates over primary arrivals only; rescue records are skipped.
inline OutcomeCounts count_outcomes(std::span<const JobRecord> records) {
  OutcomeCounts c;
  for (const auto& r : records) {
    if (!r.primary()) continue;
    ++c.n;
    switch (r.outcome) {
      case Outcome::OnTime: ++c.on_time; break;
      case Outcome::Miss: ++c.miss; break;
      case Outcome::Drop: ++c.drop; break;
    }
  }
  return c;
}

inline Rates rates(std::span<const JobRecord> records) {
  const auto c = count_outcomes(records);
  detail::require(c.n > 0, "rates: no primary arrivals");
  const double n = static_cast<double>(c.n);
  return {static_cast<double>(c.miss) / n, static_cast<double>(c.drop) / n,
          static_cast<double>(c.on_time) / n};
}

// Nearest-rank quantile: the ceil(q * n)-th smallest sample.
inline Nanos quantile(std::span<const Nanos> samples, double q) {
  detail::require(!samples.empty(), "quantile: no samples");
  detail::require(q > 0.0 && q <= 1.0, "quantile: q must lie in (0, 1]");
  std::vector<Nanos> v(samples.begin(), samples.end());
  const auto n = v.size();
  // The small offset keeps e.g. 0.95 * 20 from rounding up to rank 20.
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank - 1), v.end());
  return v[rank - 1];
}

struct BacklogStats {
  std::uint64_t max_backlog = 0;
  std::map<std::uint64_t, Nanos> time_above;  // threshold -> time with Q >= threshold
  double time_average = 0.0;
};

inline BacklogStats backlog_stats(std::span<const BacklogPoint> trace, Nanos horizon,
                                  std::span<const std::uint64_t> thresholds) {
  BacklogStats s;
  for (auto th : thresholds) s.time_above[th] = 0;
  Nanos area = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& p = trace[i];
    s.max_backlog = std::max(s.max_backlog, p.backlog);
    const Nanos end = i + 1 < trace.size() ? trace[i + 1].time : horizon;
    const Nanos len = std::max<Nanos>(0, end - p.time);
    area += len * static_cast<Nanos>(p.backlog);
    for (auto& [th, t] : s.time_above)
      if (p.backlog >= th) t += len;
  }
  if (horizon > 0) s.time_average = static_cast<double>(area) / static_cast<double>(horizon);
  return s;
}

inline std::vector<std::uint64_t> default_backlog_thresholds(
    std::optional<std::uint64_t> cap) {
  std::set<std::uint64_t> t{1, 10};
  if (cap) t.insert(*cap);
  return {t.begin(), t.end()};
}

struct ServiceMetrics {
  OutcomeCounts counts;
  std::uint64_t n_rescue = 0;
  double miss_rate = 0.0;
  double drop_rate = 0.0;
  double goodput = 0.0;
  Nanos response_p50 = 0;
  Nanos response_p95 = 0;
  Nanos response_p99 = 0;
  Nanos response_max = 0;
  double mean_tardiness = 0.0;
  Nanos max_tardiness = 0;
  std::uint64_t max_backlog = 0;
  double mean_backlog = 0.0;
  std::map<std::uint64_t, Nanos> time_above;
  double trigger_rate = 0.0;
  double utilization = 0.0;
  std::vector<double> utilization_per_server;
  Nanos horizon = 0;
  double mean_compute = 0.0;
  double mean_memory = 0.0;
  double mean_service = 0.0;
  std::uint64_t cutoff_hits = 0;
  std::optional<double> offchip_bytes_per_job;
  std::optional<double> total_offchip_bytes;

  bool operator==(const ServiceMetrics&) const = default;
};

struct MetricsOptions {
  std::vector<std::uint64_t> backlog_thresholds{1, 10};
  std::optional<double> offchip_bytes_per_job;
};

// Every summary quantity is a pure function of the log, so summaries computed
// live and from persisted artifacts agree bit for bit.
inline ServiceMetrics summarize(const RunLog& log, const MetricsOptions& opt = {}) {
  ServiceMetrics m;
  m.counts = count_outcomes(log.records);
  detail::require(m.counts.n > 0, "summarize: no primary arrivals");
  const auto r = rates(log.records);
  m.miss_rate = r.miss_rate;
  m.drop_rate = r.drop_rate;
  m.goodput = r.goodput;
  m.horizon = log.horizon;

  std::vector<Nanos> responses;
  Nanos tardiness_sum = 0;
  Nanos compute_sum = 0, memory_sum = 0, service_sum = 0;
  std::set<JobId> rescued;
  for (const auto& rec : log.records) {
    if (!rec.primary()) {
      ++m.n_rescue;
      if (rec.job.parent) rescued.insert(*rec.job.parent);
      continue;
    }
    if (!rec.admitted()) continue;
    responses.push_back(rec.response());
    tardiness_sum += rec.tardiness();
    m.max_tardiness = std::max(m.max_tardiness, rec.tardiness());
    compute_sum += rec.service.compute;
    memory_sum += rec.service.memory;
    service_sum += rec.service.total;
    m.cutoff_hits += rec.service.cutoff_hit;
  }
  const double n_primary = static_cast<double>(m.counts.n);
  m.trigger_rate = static_cast<double>(rescued.size()) / n_primary;

  if (!responses.empty()) {
    m.response_p50 = quantile(responses, 0.50);
    m.response_p95 = quantile(responses, 0.95);
    m.response_p99 = quantile(responses, 0.99);
    m.response_max = *std::max_element(responses.begin(), responses.end());
    const double admitted = static_cast<double>(responses.size());
    m.mean_tardiness = static_cast<double>(tardiness_sum) / admitted;
    m.mean_compute = static_cast<double>(compute_sum) / admitted;
    m.mean_memory = static_cast<double>(memory_sum) / admitted;
    m.mean_service = static_cast<double>(service_sum) / admitted;
  }

  const auto bs = backlog_stats(log.backlog_trace, log.horizon, opt.backlog_thresholds);
  m.max_backlog = bs.max_backlog;
  m.mean_backlog = bs.time_average;
  m.time_above = bs.time_above;

  const auto u = utilization(log);
  m.utilization = u.pooled;
  m.utilization_per_server = u.per_server;

  if (opt.offchip_bytes_per_job) {
    m.offchip_bytes_per_job = opt.offchip_bytes_per_job;
    m.total_offchip_bytes =
        *opt.offchip_bytes_per_job * static_cast<double>(responses.size());
  }
  return m;
}

}  // namespace decodeq
