#pragma once

// Shared test glue: runs the engine and the tick-stepping oracle on the same
// trace, compares them, and generates random traces and run configurations.
// Free of any test framework so the acceptance binary can use it too.

#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "decodeq/engine.hpp"
#include "decodeq/sweep.hpp"
#include "oracle.hpp"

namespace support {

using namespace decodeq;

// Service equals weight microseconds, so demands are set through `weight`.
inline ServiceModel unit_model() { return WorkloadModelParams{0, us(1), std::nullopt}; }

inline PolicySet policy_for(const oracle::Setup& s) {
  PolicySet p;
  p.scheduler = s.sched == oracle::Sched::EDF ? SchedulerPolicy::EDF : SchedulerPolicy::FIFO;
  if (s.cap) p.admission.cap = *s.cap;
  p.cutoff = s.cutoff;
  p.rescue.enabled = s.trigger != oracle::Trigger::None;
  p.rescue.budget = s.rescue_budget > 0 ? s.rescue_budget : us(10);
  switch (s.trigger) {
    case oracle::Trigger::None:
    case oracle::Trigger::Backlog:
      p.rescue.trigger = BacklogTrigger{static_cast<std::uint64_t>(s.trigger_threshold)};
      break;
    case oracle::Trigger::Slack: p.rescue.trigger = SlackTrigger{s.trigger_threshold}; break;
    case oracle::Trigger::CutoffHit: p.rescue.trigger = CutoffHitTrigger{}; break;
  }
  return p;
}

inline Job job(JobId id, Nanos arrival, Nanos deadline, std::uint32_t service_us) {
  return Job{id, JobKind::Primary, std::nullopt, arrival, deadline, service_us};
}

inline RunLog run_engine(const std::vector<Job>& jobs, const oracle::Setup& s) {
  const Simulator sim(unit_model(), policy_for(s), s.servers, 0);
  return sim.run(jobs);
}

inline oracle::Outcome run_oracle(const std::vector<Job>& jobs, const oracle::Setup& s) {
  std::vector<oracle::Item> items;
  for (const auto& j : jobs)
    items.push_back({j.id, false, std::nullopt, j.arrival, j.deadline,
                     static_cast<Nanos>(j.weight) * us(1)});
  return oracle::simulate(items, s);
}

// First disagreement between engine and oracle, or nullopt when they agree
// on every start, completion, outcome, trigger and the backlog trace.
inline std::optional<std::string> mismatch(const RunLog& log, const oracle::Outcome& ref) {
  std::ostringstream why;
  if (log.records.size() != ref.results.size()) {
    why << "record count " << log.records.size() << " vs " << ref.results.size();
    return why.str();
  }
  for (std::size_t i = 0; i < ref.results.size(); ++i) {
    const auto& r = log.records[i];
    const auto& o = ref.results[i];
    why << "job " << i << ": ";
    if ((r.job.kind == JobKind::Rescue) != o.rescue) return why.str() + "kind";
    if ((r.outcome == Outcome::Drop) != o.dropped) return why.str() + "drop";
    if (o.dropped) {
      why.str("");
      continue;
    }
    if (!r.start || *r.start != o.start) return why.str() + "start";
    if (!r.completion || *r.completion != o.completion) return why.str() + "completion";
    if (r.outcome != classify(o.completion, r.job.deadline)) return why.str() + "outcome";
    if (r.service.total != o.service) return why.str() + "service";
    if (r.service.cutoff_hit != o.cutoff_hit) return why.str() + "cutoff_hit";
    if (r.rescue_triggered != o.triggered) return why.str() + "trigger";
    why.str("");
  }
  std::vector<std::pair<Nanos, std::size_t>> trace;
  for (const auto& p : log.backlog_trace) trace.emplace_back(p.time, p.backlog);
  if (trace != ref.trace) return std::string("backlog trace");
  return std::nullopt;
}

// Small random traces on a 1 us grid so the tick oracle is exact.
struct TraceCase {
  std::vector<Job> jobs;
  oracle::Setup setup;
};

inline TraceCase random_trace(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); };
  TraceCase c;
  const int n = pick(1, 14);
  Nanos t = 0;
  for (int i = 0; i < n; ++i) {
    t += us(pick(0, 6));
    c.jobs.push_back(job(static_cast<JobId>(i), t, t + us(pick(3, 60)),
                         static_cast<std::uint32_t>(pick(1, 15))));
  }
  auto& s = c.setup;
  s.servers = static_cast<std::size_t>(pick(1, 3));
  s.sched = pick(0, 1) ? oracle::Sched::EDF : oracle::Sched::FIFO;
  if (pick(0, 2) == 0) s.cap = static_cast<std::size_t>(pick(0, 4));
  if (pick(0, 1)) s.cutoff = us(pick(2, 12));
  switch (pick(0, 3)) {
    case 0: s.trigger = oracle::Trigger::None; break;
    case 1:
      s.trigger = oracle::Trigger::Backlog;
      s.trigger_threshold = pick(0, 3);
      break;
    case 2:
      s.trigger = oracle::Trigger::Slack;
      s.trigger_threshold = us(pick(0, 10));
      break;
    case 3: s.trigger = oracle::Trigger::CutoffHit; break;
  }
  s.rescue_budget = us(pick(1, 8));
  return c;
}

struct NamedTrace {
  std::string name;
  TraceCase trace;
};

// Short traces (at most six jobs) exercising each policy knob.
inline std::vector<NamedTrace> hand_traces() {
  using oracle::Sched;
  using oracle::Trigger;
  return {
      {"edf_reorders",
       {{job(0, 0, us(100), 5), job(1, us(1), us(90), 4), job(2, us(2), us(20), 3)},
        {.servers = 1}}},
      {"fifo_keeps_order",
       {{job(0, 0, us(100), 5), job(1, us(1), us(90), 4), job(2, us(2), us(20), 3)},
        {.servers = 1, .sched = Sched::FIFO}}},
      {"cap_drops",
       {{job(0, 0, us(50), 10), job(1, 0, us(50), 2), job(2, 0, us(50), 2),
         job(3, us(1), us(60), 1), job(4, us(11), us(60), 1)},
        {.servers = 1, .cap = 2}}},
      {"two_servers_cutoff",
       {{job(0, 0, us(40), 30), job(1, 0, us(40), 8), job(2, us(3), us(20), 9),
         job(3, us(4), us(50), 2)},
        {.servers = 2, .cutoff = us(10)}}},
      {"backlog_rescue",
       {{job(0, 0, us(30), 4), job(1, 0, us(30), 4), job(2, 0, us(40), 4),
         job(3, us(1), us(40), 4)},
        {.servers = 1, .trigger = Trigger::Backlog, .trigger_threshold = 2,
         .rescue_budget = us(3)}}},
      {"slack_rescue",
       {{job(0, 0, us(12), 10), job(1, us(2), us(30), 6), job(2, us(20), us(40), 3)},
        {.servers = 1, .trigger = Trigger::Slack, .trigger_threshold = us(5),
         .rescue_budget = us(4)}}},
      {"cutoff_hit_rescue",
       {{job(0, 0, us(30), 25), job(1, us(1), us(35), 3), job(2, us(2), us(80), 12)},
        {.servers = 2, .cutoff = us(12), .trigger = Trigger::CutoffHit,
         .rescue_budget = us(5)}}},
      {"rescue_fills_cap",
       {{job(0, 0, us(8), 5), job(1, us(5), us(50), 5), job(2, us(5), us(50), 5)},
        {.servers = 1, .cap = 1, .trigger = Trigger::Slack, .trigger_threshold = us(5),
         .rescue_budget = us(2)}}},
  };
}

// Random full run configurations covering every service model and policy.
inline RunConfig random_config(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); };
  const char* codes[] = {"bb72", "bb144", "bb288"};
  RunConfig c = regimes::base(codes[pick(0, 2)], seed);
  c.label = "prop";
  c.organization = pick(0, 1) ? StateOrganization::EdgeCentric : StateOrganization::CachedSummary;
  switch (pick(0, 2)) {
    case 0: c.arrivals = PoissonArrivals{1000.0 * pick(5, 120)}; break;
    case 1:
      c.arrivals = BurstyOnOffArrivals{1000.0 * pick(20, 120), us(pick(200, 2000)),
                                       us(pick(200, 3000))};
      break;
    case 2: c.arrivals = DeterministicArrivals{us(pick(5, 40))}; break;
  }
  c.slack = us(pick(20, 150));
  switch (pick(0, 3)) {
    case 0: c.service = FixedService{us(pick(5, 30))}; break;
    case 1: c.service = regimes::traffic_point(default_budget_grid()[pick(0, 6)]); break;
    case 2: c.service = WorkloadModelParams{us(pick(0, 10)), us(pick(1, 4)), std::nullopt}; break;
    case 3: {
      ChmParams chm;
      chm.compute = WorkloadModelParams{us(pick(1, 10)), us(pick(1, 5)), std::nullopt};
      chm.memory = regimes::traffic_point(default_budget_grid()[pick(0, 6)]);
      chm.combine = pick(0, 1) ? Combine::Max : Combine::Sum;
      if (pick(0, 1)) chm.jitter = JitterParams{};
      c.service = chm;
      break;
    }
  }
  c.policy.scheduler = pick(0, 1) ? SchedulerPolicy::EDF : SchedulerPolicy::FIFO;
  if (pick(0, 1)) c.policy.admission.cap = static_cast<std::uint64_t>(pick(0, 40));
  if (pick(0, 1)) c.policy.cutoff = us(pick(5, 60));
  if (pick(0, 1)) {
    c.policy.rescue.enabled = true;
    c.policy.rescue.budget = us(pick(1, 15));
    switch (pick(0, 2)) {
      case 0:
        c.policy.rescue.trigger = BacklogTrigger{static_cast<std::uint64_t>(pick(0, 4))};
        break;
      case 1: c.policy.rescue.trigger = SlackTrigger{us(pick(0, 20))}; break;
      case 2: c.policy.rescue.trigger = CutoffHitTrigger{}; break;
    }
  }
  c.n_servers = static_cast<std::size_t>(pick(1, 4));
  c.n_jobs = static_cast<std::size_t>(pick(1, 300));
  resolve(c);
  return c;
}

// Time integral of the backlog trace over [0, horizon].
inline Nanos backlog_area(const RunLog& log) {
  Nanos area = 0;
  const auto& tr = log.backlog_trace;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Nanos end = i + 1 < tr.size() ? tr[i + 1].time : log.horizon;
    area += static_cast<Nanos>(tr[i].backlog) * (end - tr[i].time);
  }
  return area;
}

}  // namespace support
