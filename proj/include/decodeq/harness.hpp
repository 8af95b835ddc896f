#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decodeq/config.hpp"
#include "decodeq/engine.hpp"
#include "decodeq/errors.hpp"
#include "decodeq/metrics.hpp"
#include "decodeq/rng.hpp"

namespace decodeq {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Running a configuration.

inline std::vector<Job> build_primary_jobs(const RunConfig& c) {
  const auto arrivals =
      generate_arrivals(c.arrivals, c.n_jobs, stream_seed(c.seed, streams::kArrivals));
  const auto weights =
      sample_weights(c.weights, c.n_jobs, stream_seed(c.seed, streams::kWeights));
  return make_primary_jobs(arrivals, c.slack, weights);
}

inline RunLog run(RunConfig config) {
  resolve(config);
  validate(config);
  const Simulator sim(config.service, config.policy, config.n_servers,
                      stream_seed(config.seed, streams::kJitter));
  RunLog log = sim.run(build_primary_jobs(config));
  log.seed = config.seed;
  log.config_json = to_json(config).dump(2) + "\n";
  return log;
}

inline MetricsOptions metrics_options(const RunConfig& c) {
  MetricsOptions o;
  o.backlog_thresholds = default_backlog_thresholds(c.policy.admission.cap);
  o.offchip_bytes_per_job = offchip_bytes_per_job(c.service);
  return o;
}

// ---------------------------------------------------------------------------
// Artifact formats.

inline constexpr std::string_view kJobsHeader =
    "job_id,kind,parent_id,arrival_ns,deadline_ns,weight,compute_ns,memory_ns,"
    "service_ns,cutoff_hit,start_ns,completion_ns,outcome,lateness_ns,"
    "rescue_triggered,server";
inline constexpr std::string_view kBacklogHeader = "time_ns,backlog";

inline std::string jobs_csv(const RunLog& log) {
  std::ostringstream os;
  os << kJobsHeader << '\n';
  for (const auto& r : log.records) {
    const bool primary = r.primary();
    os << r.job.id << ',' << (primary ? "primary" : "rescue") << ',';
    if (r.job.parent) os << *r.job.parent;
    os << ',' << r.job.arrival << ',' << r.job.deadline << ',';
    if (primary) os << r.job.weight;
    os << ',' << r.service.compute << ',' << r.service.memory << ','
       << r.service.total << ',' << int{r.service.cutoff_hit} << ',';
    if (r.start) os << *r.start;
    os << ',';
    if (r.completion) os << *r.completion;
    os << ',' << to_string(r.outcome) << ',';
    if (r.completion) os << r.lateness();
    os << ',' << int{r.rescue_triggered} << ',';
    if (r.server) os << *r.server;
    os << '\n';
  }
  return os.str();
}

inline std::string backlog_csv(const RunLog& log) {
  std::ostringstream os;
  os << kBacklogHeader << '\n';
  for (const auto& p : log.backlog_trace) os << p.time << ',' << p.backlog << '\n';
  return os.str();
}

inline Json summary_to_json(const ServiceMetrics& m) {
  Json above = Json::object();
  for (const auto& [th, t] : m.time_above) above[std::to_string(th)] = t;
  return {{"schema_version", kSchemaVersion},
          {"n_primary", m.counts.n},
          {"n_on_time", m.counts.on_time},
          {"n_miss", m.counts.miss},
          {"n_drop", m.counts.drop},
          {"n_rescue", m.n_rescue},
          {"miss_rate", m.miss_rate},
          {"drop_rate", m.drop_rate},
          {"goodput", m.goodput},
          {"response_p50_ns", m.response_p50},
          {"response_p95_ns", m.response_p95},
          {"response_p99_ns", m.response_p99},
          {"response_max_ns", m.response_max},
          {"mean_tardiness_ns", m.mean_tardiness},
          {"max_tardiness_ns", m.max_tardiness},
          {"max_backlog", m.max_backlog},
          {"mean_backlog", m.mean_backlog},
          {"time_above_ns", above},
          {"trigger_rate", m.trigger_rate},
          {"cutoff_hits", m.cutoff_hits},
          {"utilization", m.utilization},
          {"utilization_per_server", m.utilization_per_server},
          {"horizon_ns", m.horizon},
          {"mean_compute_ns", m.mean_compute},
          {"mean_memory_ns", m.mean_memory},
          {"mean_service_ns", m.mean_service},
          {"offchip_bytes_per_job", detail::opt_json(m.offchip_bytes_per_job)},
          {"total_offchip_bytes", detail::opt_json(m.total_offchip_bytes)}};
}

inline std::string summary_text(const ServiceMetrics& m) {
  return summary_to_json(m).dump(2) + "\n";
}

inline void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogFormatError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes config.json, jobs.csv, backlog.csv and summary.json into `dir`.
inline ServiceMetrics emit_artifacts(const RunLog& log, const RunConfig& config,
                                     const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  const auto metrics = summarize(log, metrics_options(config));
  write_file(dir / "config.json", log.config_json);
  write_file(dir / "jobs.csv", jobs_csv(log));
  write_file(dir / "backlog.csv", backlog_csv(log));
  write_file(dir / "summary.json", summary_text(metrics));
  return metrics;
}

// ---------------------------------------------------------------------------
// Reading artifacts back.

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text,
                                                 const std::string& file) {
  if (text.empty() || text.back() != '\n')
    throw LogFormatError(file + ": truncated (missing final newline)");
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto c = line.find(',', pos);
    out.push_back(line.substr(pos, c == std::string_view::npos ? c : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

template <typename T>
T parse_num(std::string_view s, const std::string& ctx) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end)
    throw LogFormatError(ctx + ": bad number '" + std::string(s) + "'");
  return v;
}

template <typename T>
std::optional<T> parse_opt(std::string_view s, const std::string& ctx) {
  if (s.empty()) return std::nullopt;
  return parse_num<T>(s, ctx);
}

}  // namespace detail

inline std::vector<JobRecord> parse_jobs_csv(std::string_view text) {
  const auto lines = detail::split_lines(text, "jobs.csv");
  if (lines.empty() || lines[0] != kJobsHeader)
    throw LogFormatError("jobs.csv: unexpected header");
  std::vector<JobRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string ctx = "jobs.csv line " + std::to_string(i + 1);
    const auto f = detail::split_fields(lines[i]);
    if (f.size() != 16) throw LogFormatError(ctx + ": expected 16 fields");
    JobRecord r;
    r.job.id = detail::parse_num<JobId>(f[0], ctx);
    if (r.job.id != records.size()) throw LogFormatError(ctx + ": job ids not contiguous");
    if (f[1] == "primary") r.job.kind = JobKind::Primary;
    else if (f[1] == "rescue") r.job.kind = JobKind::Rescue;
    else throw LogFormatError(ctx + ": bad kind");
    r.job.parent = detail::parse_opt<JobId>(f[2], ctx);
    r.job.arrival = detail::parse_num<Nanos>(f[3], ctx);
    r.job.deadline = detail::parse_num<Nanos>(f[4], ctx);
    r.job.weight = detail::parse_opt<std::uint32_t>(f[5], ctx).value_or(0);
    r.service.compute = detail::parse_num<Nanos>(f[6], ctx);
    r.service.memory = detail::parse_num<Nanos>(f[7], ctx);
    r.service.total = detail::parse_num<Nanos>(f[8], ctx);
    r.service.cutoff_hit = detail::parse_num<int>(f[9], ctx) != 0;
    r.start = detail::parse_opt<Nanos>(f[10], ctx);
    r.completion = detail::parse_opt<Nanos>(f[11], ctx);
    r.outcome = parse_outcome(f[12]);
    const auto lateness = detail::parse_opt<Nanos>(f[13], ctx);
    r.rescue_triggered = detail::parse_num<int>(f[14], ctx) != 0;
    r.server = detail::parse_opt<std::size_t>(f[15], ctx);
    if ((r.outcome == Outcome::Drop) != !r.completion || r.start.has_value() != r.completion.has_value())
      throw LogFormatError(ctx + ": outcome inconsistent with start/completion");
    if (r.completion && (!lateness || *lateness != r.lateness()))
      throw LogFormatError(ctx + ": lateness inconsistent with completion");
    records.push_back(r);
  }
  return records;
}

inline std::vector<BacklogPoint> parse_backlog_csv(std::string_view text) {
  const auto lines = detail::split_lines(text, "backlog.csv");
  if (lines.empty() || lines[0] != kBacklogHeader)
    throw LogFormatError("backlog.csv: unexpected header");
  std::vector<BacklogPoint> trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string ctx = "backlog.csv line " + std::to_string(i + 1);
    const auto f = detail::split_fields(lines[i]);
    if (f.size() != 2) throw LogFormatError(ctx + ": expected 2 fields");
    trace.push_back({detail::parse_num<Nanos>(f[0], ctx),
                     detail::parse_num<std::uint64_t>(f[1], ctx)});
  }
  if (trace.empty() || trace.front().time != 0)
    throw LogFormatError("backlog.csv: trace must start at t = 0");
  return trace;
}

struct LoadedRun {
  RunConfig config;
  RunLog log;
};

// Rebuilds a RunLog from a run directory, rejecting logs that are
// incomplete rather than summarizing whatever is present.
inline LoadedRun load_run(const fs::path& dir) {
  LoadedRun out;
  const std::string config_text = read_file(dir / "config.json");
  try {
    out.config = parse_config(config_text);
  } catch (const ConfigError& e) {
    throw LogFormatError(std::string("config.json: ") + e.what());
  }
  RunLog& log = out.log;
  log.config_json = config_text;
  log.seed = out.config.seed;
  log.n_servers = out.config.n_servers;
  log.records = parse_jobs_csv(read_file(dir / "jobs.csv"));
  log.backlog_trace = parse_backlog_csv(read_file(dir / "backlog.csv"));

  std::size_t primaries = 0, triggered = 0, rescues = 0;
  for (const auto& r : log.records) {
    if (r.primary()) {
      if (rescues > 0) throw LogFormatError("jobs.csv: primary after rescue records");
      ++primaries;
      triggered += r.rescue_triggered;
    } else {
      ++rescues;
      if (!r.job.parent || *r.job.parent >= primaries ||
          !log.records[*r.job.parent].rescue_triggered)
        throw LogFormatError("jobs.csv: rescue record without a triggering parent");
    }
    if (r.server && *r.server >= log.n_servers)
      throw LogFormatError("jobs.csv: server index out of range");
    log.horizon = std::max({log.horizon, r.job.arrival, r.completion.value_or(0)});
  }
  if (primaries != out.config.n_jobs)
    throw LogFormatError("jobs.csv: expected " + std::to_string(out.config.n_jobs) +
                         " primary records, found " + std::to_string(primaries));
  if (triggered != rescues)
    throw LogFormatError("jobs.csv: rescue records do not match trigger flags");
  if (log.backlog_trace.back().time > log.horizon)
    throw LogFormatError("backlog.csv: trace extends past the run horizon");
  return out;
}

inline ServiceMetrics recompute(const fs::path& dir) {
  const auto loaded = load_run(dir);
  return summarize(loaded.log, metrics_options(loaded.config));
}

// Default artifact root: $DECODEQ_OUT or ./runs.
inline fs::path default_output_root() {
  if (const char* env = std::getenv("DECODEQ_OUT"); env && *env) return env;
  return "runs";
}

}  // namespace decodeq
