#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "decodeq/costmodel.hpp"
#include "decodeq/errors.hpp"
#include "decodeq/policy.hpp"
#include "decodeq/records.hpp"
#include "decodeq/rng.hpp"

namespace decodeq {

// Q(t) takes `backlog` from `time` until the next breakpoint.
struct BacklogPoint {
  Nanos time = 0;
  std::uint64_t backlog = 0;
  bool operator==(const BacklogPoint&) const = default;
};

struct RunLog {
  std::vector<JobRecord> records;  // indexed by job id; primaries first
  std::vector<BacklogPoint> backlog_trace;
  std::size_t n_servers = 1;
  Nanos horizon = 0;
  std::uint64_t seed = 0;
  std::string config_json;  // archived run configuration

  bool operator==(const RunLog&) const = default;
};

enum class EventKind : std::uint8_t { Completion = 0, Arrival = 1 };

struct SimEvent {
  Nanos time = 0;
  EventKind kind = EventKind::Arrival;
  std::uint64_t seq = 0;
  JobId job = 0;
  std::size_t server = 0;

  // Total order: time, then completions before arrivals, then sequence.
  friend bool operator>(const SimEvent& a, const SimEvent& b) {
    return std::tie(a.time, a.kind, a.seq) > std::tie(b.time, b.kind, b.seq);
  }
};

// Non-preemptive multi-server queue driven by a time-ordered event list.
// One instance is immutable; `run` may be called concurrently.
class Simulator {
 public:
  Simulator(ServiceModel model, PolicySet policy, std::size_t n_servers,
            std::uint64_t jitter_seed)
      : model_(std::move(model)),
        policy_(std::move(policy)),
        n_servers_(n_servers),
        jitter_seed_(jitter_seed) {
    detail::require(n_servers_ >= 1, "engine: n_servers must be >= 1");
    validate(model_);
    validate(policy_);
  }

  RunLog run(std::span<const Job> primaries) const {
    State st(*this);
    st.log.records.reserve(primaries.size());
    for (const Job& j : primaries) {
      detail::ensure(j.kind == JobKind::Primary && j.id == st.log.records.size(),
                     "engine: primaries must carry ids 0..N-1 in order");
      st.log.records.push_back(JobRecord{.job = j});
      st.push_event(j.arrival, EventKind::Arrival, j.id, 0);
    }
    while (!st.events.empty()) {
      const SimEvent ev = st.events.top();
      st.events.pop();
      st.log.horizon = std::max(st.log.horizon, ev.time);
      if (ev.kind == EventKind::Arrival)
        st.on_arrival(ev);
      else
        st.on_completion(ev);
      st.dispatch(ev.time);
    }
    detail::ensure(st.waiting.empty(), "engine: jobs left waiting after drain");
    return std::move(st.log);
  }

  const ServiceModel& model() const { return model_; }
  const PolicySet& policy() const { return policy_; }
  std::size_t n_servers() const { return n_servers_; }

  // Service a job receives when dispatched. Jitter is keyed by job id, so the
  // draw does not depend on dispatch order.
  ServiceBreakdown service_for(const Job& job) const {
    if (job.kind == JobKind::Rescue) return rescue_service(policy_.rescue);
    std::optional<double> factor;
    if (uses_jitter(model_)) {
      const auto& j = *std::get<ChmParams>(model_).jitter;
      factor = sample_jitter(keyed_uniform(jitter_seed_, job.id), j.shape,
                             j.truncation);
    }
    return with_cutoff(evaluate_service(job, model_, factor), policy_.cutoff);
  }

 private:
  struct Waiting {
    PriorityKey key;
    JobId id;
    friend bool operator>(const Waiting& a, const Waiting& b) {
      return a.key > b.key;
    }
  };

  struct State {
    explicit State(const Simulator& s) : sim(s), busy(s.n_servers_, false) {
      log.n_servers = s.n_servers_;
      log.backlog_trace.push_back({0, 0});
    }

    const Simulator& sim;
    RunLog log;
    std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> events;
    std::priority_queue<Waiting, std::vector<Waiting>, std::greater<>> waiting;
    std::vector<bool> busy;
    std::uint64_t next_seq = 0;

    void push_event(Nanos t, EventKind kind, JobId job, std::size_t server) {
      events.push(SimEvent{t, kind, next_seq++, job, server});
    }

    // Collapse same-instant changes so the trace holds one value per time.
    void note_backlog(Nanos t) {
      const std::uint64_t q = waiting.size();
      auto& trace = log.backlog_trace;
      if (trace.back().time == t) {
        trace.back().backlog = q;
        if (trace.size() > 1 && trace[trace.size() - 2].backlog == q)
          trace.pop_back();
      } else if (trace.back().backlog != q) {
        trace.push_back({t, q});
      }
    }

    void enqueue(const Job& job, Nanos now) {
      waiting.push({priority_key(job, sim.policy_.scheduler), job.id});
      note_backlog(now);
    }

    void on_arrival(const SimEvent& ev) {
      JobRecord& rec = log.records[ev.job];
      if (admit(waiting.size(), sim.policy_.admission) == Admission::Drop) {
        rec.outcome = Outcome::Drop;
        return;
      }
      rec.outcome = Outcome::OnTime;  // provisional until completion
      enqueue(rec.job, ev.time);
    }

    void on_completion(const SimEvent& ev) {
      busy[ev.server] = false;
      JobRecord& rec = log.records[ev.job];
      detail::ensure(rec.start && *rec.start + rec.service.total == ev.time,
                     "engine: completion does not match start + service");
      rec.completion = ev.time;
      rec.outcome = classify(ev.time, rec.job.deadline);
      if (!rescue_trigger(rec, waiting.size(), sim.policy_.rescue)) return;
      rec.rescue_triggered = true;
      const JobRecord parent = rec;  // push_back below may reallocate
      const Job rescue =
          make_rescue_job(parent, sim.policy_.rescue, ev.time, log.records.size());
      log.records.push_back(JobRecord{.job = rescue, .outcome = Outcome::OnTime});
      enqueue(rescue, ev.time);
    }

    void dispatch(Nanos now) {
      for (std::size_t s = 0; s < busy.size() && !waiting.empty(); ++s) {
        if (busy[s]) continue;
        const JobId id = waiting.top().id;
        waiting.pop();
        JobRecord& rec = log.records[id];
        rec.service = sim.service_for(rec.job);
        detail::ensure(rec.service.total >= 0, "engine: negative service time");
        rec.start = now;
        rec.server = s;
        busy[s] = true;
        push_event(now + rec.service.total, EventKind::Completion, id, s);
        note_backlog(now);
      }
    }
  };

  ServiceModel model_;
  PolicySet policy_;
  std::size_t n_servers_;
  std::uint64_t jitter_seed_;
};

// Q(t) at time t (the value of the segment containing t).
inline std::uint64_t backlog_at(const RunLog& log, Nanos t) {
  detail::require(t >= 0 && t <= log.horizon, "backlog_at: time outside [0, horizon]");
  const auto& tr = log.backlog_trace;
  auto it = std::upper_bound(tr.begin(), tr.end(), t,
                             [](Nanos v, const BacklogPoint& p) { return v < p.time; });
  return it == tr.begin() ? 0 : std::prev(it)->backlog;
}

struct Utilization {
  std::vector<double> per_server;
  double pooled = 0.0;
};

inline Utilization utilization(const RunLog& log) {
  Utilization u;
  u.per_server.assign(log.n_servers, 0.0);
  if (log.horizon <= 0) return u;
  std::vector<Nanos> busy(log.n_servers, 0);
  for (const auto& r : log.records)
    if (r.server) busy[*r.server] += r.service.total;
  Nanos all = 0;
  for (std::size_t s = 0; s < busy.size(); ++s) {
    u.per_server[s] = static_cast<double>(busy[s]) / static_cast<double>(log.horizon);
    all += busy[s];
  }
  u.pooled = static_cast<double>(all) /
             (static_cast<double>(log.horizon) * static_cast<double>(log.n_servers));
  return u;
}

}  // namespace decodeq
