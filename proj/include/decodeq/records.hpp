#pragma once

#include <optional>
#include <string_view>

#include "decodeq/costmodel.hpp"
#include "decodeq/errors.hpp"
#include "decodeq/workload.hpp"

namespace decodeq {

enum class Outcome { OnTime, Miss, Drop };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::OnTime: return "on_time";
    case Outcome::Miss: return "miss";
    case Outcome::Drop: return "drop";
  }
  return "?";
}

inline Outcome parse_outcome(std::string_view s) {
  if (s == "on_time") return Outcome::OnTime;
  if (s == "miss") return Outcome::Miss;
  if (s == "drop") return Outcome::Drop;
  throw LogFormatError("unknown outcome '" + std::string(s) + "'");
}

// Per-job outcome. Dropped jobs have neither start nor completion.
struct JobRecord {
  Job job;
  ServiceBreakdown service;
  std::optional<Nanos> start;
  std::optional<Nanos> completion;
  std::optional<std::size_t> server;
  Outcome outcome = Outcome::Drop;
  bool rescue_triggered = false;

  bool admitted() const { return outcome != Outcome::Drop; }
  bool primary() const { return job.kind == JobKind::Primary; }

  // c - d; only meaningful for admitted jobs.
  Nanos lateness() const { return completion.value_or(0) - job.deadline; }
  Nanos tardiness() const { return std::max<Nanos>(0, lateness()); }
  Nanos response() const { return completion.value_or(0) - job.arrival; }
  Nanos wait() const { return start.value_or(0) - job.arrival; }

  bool operator==(const JobRecord&) const = default;
};

// Completing exactly at the deadline counts as on time.
constexpr Outcome classify(Nanos completion, Nanos deadline) {
  return completion - deadline > 0 ? Outcome::Miss : Outcome::OnTime;
}

}  // namespace decodeq
