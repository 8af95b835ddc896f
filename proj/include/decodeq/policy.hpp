#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <tuple>
#include <variant>

#include "decodeq/errors.hpp"
#include "decodeq/records.hpp"

namespace decodeq {

enum class SchedulerPolicy { EDF, FIFO };

constexpr std::string_view to_string(SchedulerPolicy s) {
  return s == SchedulerPolicy::EDF ? "edf" : "fifo";
}

inline SchedulerPolicy parse_scheduler(std::string_view s) {
  if (s == "edf") return SchedulerPolicy::EDF;
  if (s == "fifo") return SchedulerPolicy::FIFO;
  throw ConfigError("unknown scheduler '" + std::string(s) + "'");
}

// Lexicographic dispatch priority; smaller is served first. FIFO ignores the
// deadline slot.
using PriorityKey = std::tuple<Nanos, Nanos, JobId>;

constexpr PriorityKey priority_key(const Job& job, SchedulerPolicy policy) {
  if (policy == SchedulerPolicy::EDF) return {job.deadline, job.arrival, job.id};
  return {0, job.arrival, job.id};
}

inline JobId select_next(std::span<const Job> queue, SchedulerPolicy policy) {
  detail::require(!queue.empty(), "select_next: empty queue");
  return std::min_element(queue.begin(), queue.end(),
                          [policy](const Job& a, const Job& b) {
                            return priority_key(a, policy) < priority_key(b, policy);
                          })
      ->id;
}

// Backlog cap on queued (not in-service) jobs. nullopt is unbounded; a cap of
// zero drops every arrival.
struct AdmissionPolicy {
  std::optional<std::uint64_t> cap;
  bool operator==(const AdmissionPolicy&) const = default;
};

enum class Admission { Admit, Drop };

constexpr Admission admit(std::uint64_t q_before, const AdmissionPolicy& policy) {
  return policy.cap && q_before >= *policy.cap ? Admission::Drop : Admission::Admit;
}

struct BacklogTrigger {
  std::uint64_t threshold = 2;
  bool operator==(const BacklogTrigger&) const = default;
};
struct SlackTrigger {
  Nanos threshold = us(5);
  bool operator==(const SlackTrigger&) const = default;
};
struct CutoffHitTrigger {
  bool operator==(const CutoffHitTrigger&) const = default;
};

using RescueTrigger = std::variant<BacklogTrigger, SlackTrigger, CutoffHitTrigger>;

enum class RescueDeadline { InheritParent };

struct RescuePolicy {
  bool enabled = false;
  RescueTrigger trigger = BacklogTrigger{};
  Nanos budget = us(10);
  RescueDeadline deadline_rule = RescueDeadline::InheritParent;

  bool operator==(const RescuePolicy&) const = default;
};

inline void validate(const RescuePolicy& p) {
  if (!p.enabled) return;
  detail::require(p.budget > 0, "rescue: budget must be > 0");
  if (const auto* s = std::get_if<SlackTrigger>(&p.trigger))
    detail::require(s->threshold >= 0, "rescue: slack threshold must be >= 0");
}

struct PolicySet {
  SchedulerPolicy scheduler = SchedulerPolicy::EDF;
  AdmissionPolicy admission;
  std::optional<Nanos> cutoff;
  RescuePolicy rescue;

  bool operator==(const PolicySet&) const = default;
};

inline void validate(const PolicySet& p) {
  detail::require(!p.cutoff || *p.cutoff > 0, "policy: cutoff must be > 0");
  validate(p.rescue);
}

// Evaluated once, when a primary job completes. `q_now` is the waiting-queue
// length at that instant, before the freed server picks its next job.
inline bool rescue_trigger(const JobRecord& record, std::uint64_t q_now,
                           const RescuePolicy& policy) {
  if (!policy.enabled || !record.primary() || !record.completion) return false;
  return std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, BacklogTrigger>)
          return q_now >= t.threshold;
        else if constexpr (std::is_same_v<T, SlackTrigger>)
          return record.job.deadline - *record.completion <= t.threshold;
        else
          return record.service.cutoff_hit;
      },
      policy.trigger);
}

// A rescue item released at the parent's completion. Its deadline may already
// be in the past, in which case it will be recorded as a miss.
inline Job make_rescue_job(const JobRecord& parent, const RescuePolicy& policy,
                           Nanos now, JobId id) {
  Nanos deadline = parent.job.deadline;
  switch (policy.deadline_rule) {
    case RescueDeadline::InheritParent: deadline = parent.job.deadline; break;
  }
  return Job{id, JobKind::Rescue, parent.job.id, now, deadline, 0};
}

inline ServiceBreakdown rescue_service(const RescuePolicy& policy) {
  return {policy.budget, 0, policy.budget, false};
}

}  // namespace decodeq
