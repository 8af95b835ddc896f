#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "decodeq/codes.hpp"
#include "decodeq/costmodel.hpp"
#include "decodeq/errors.hpp"
#include "decodeq/policy.hpp"
#include "decodeq/workload.hpp"

namespace decodeq {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

// Everything needed to reproduce one run.
struct RunConfig {
  std::string label;
  CodeSpec code = *find_code("bb72");
  StateOrganization organization = StateOrganization::CachedSummary;
  FootprintParams footprint;
  ArrivalProcess arrivals = PoissonArrivals{100'000.0};
  Nanos slack = us(100);
  WeightModel weights{72, 10, 0.01};
  ServiceModel service = FixedService{};
  PolicySet policy;
  std::size_t n_servers = 1;
  std::size_t n_jobs = 5000;
  std::uint64_t seed = 1;
  std::string output_dir;

  bool operator==(const RunConfig&) const = default;
};

// Aligned decoder-state footprint for the configured code and organization.
inline Bytes config_footprint(const RunConfig& c) {
  return state_footprint(c.code, c.organization, c.footprint);
}

// Fills model fields derived from the code (the traffic footprint).
inline void resolve(RunConfig& c) {
  const Bytes fp = config_footprint(c);
  if (auto* tm = std::get_if<TrafficModelParams>(&c.service)) tm->footprint = fp;
  if (auto* chm = std::get_if<ChmParams>(&c.service)) chm->memory.footprint = fp;
}

inline void validate(const RunConfig& c) {
  validate(c.code);
  validate(c.footprint);
  validate(c.arrivals);
  validate(c.weights);
  validate(c.service);
  validate(c.policy);
  detail::require(c.slack > 0, "config: slack_ns must be > 0");
  detail::require(c.n_servers >= 1, "config: n_servers must be >= 1");
  detail::require(c.n_jobs >= 1, "config: n_jobs must be >= 1");
}

// ---------------------------------------------------------------------------
// JSON mapping. Objects are read strictly: unknown keys are rejected so that
// typos cannot silently fall back to defaults.

namespace detail {

inline void check_keys(const Json& j, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  require(j.is_object(), std::string(where) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok |= (k == a);
    require(ok, std::string(where) + ": unknown key '" + k + "'");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, std::string_view where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <typename T>
T get_req(const Json& j, const char* key, std::string_view where) {
  require(j.contains(key), std::string(where) + ": missing '" + key + "'");
  return get_or<T>(j, key, T{}, where);
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key, std::string_view where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_or<T>(j, key, T{}, where);
}

template <typename T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace detail

inline Json code_to_json(const CodeSpec& c) {
  return Json{{"name", c.name},         {"n_data", c.n_data},
              {"checks_x", c.checks_x}, {"checks_z", c.checks_z},
              {"row_weight", c.row_weight}, {"k_logical", detail::opt_json(c.k_logical)}};
}

inline CodeSpec code_from_json(const Json& j) {
  if (j.is_string()) {
    auto c = find_code(j.get<std::string>());
    detail::require(c.has_value(), "code: unknown registry key '" + j.get<std::string>() + "'");
    return *c;
  }
  detail::check_keys(j, "code", {"name", "n_data", "checks_x", "checks_z", "row_weight", "k_logical"});
  CodeSpec c;
  c.name = detail::get_req<std::string>(j, "name", "code");
  c.n_data = detail::get_req<std::uint64_t>(j, "n_data", "code");
  c.checks_x = detail::get_req<std::uint64_t>(j, "checks_x", "code");
  c.checks_z = detail::get_req<std::uint64_t>(j, "checks_z", "code");
  c.row_weight = detail::get_req<std::uint64_t>(j, "row_weight", "code");
  c.k_logical = detail::get_opt<std::uint64_t>(j, "k_logical", "code");
  return c;
}

inline Json arrivals_to_json(const ArrivalProcess& a) {
  return std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PoissonArrivals>)
          return {{"kind", "poisson"}, {"rate_per_s", p.rate_per_s}};
        else if constexpr (std::is_same_v<T, BurstyOnOffArrivals>)
          return {{"kind", "bursty_on_off"}, {"rate_on_per_s", p.rate_on_per_s},
                  {"on_ns", p.on_duration}, {"off_ns", p.off_duration}};
        else
          return {{"kind", "deterministic"}, {"interarrival_ns", p.interarrival}};
      },
      a);
}

inline ArrivalProcess arrivals_from_json(const Json& j) {
  const auto kind = detail::get_req<std::string>(j, "kind", "arrivals");
  if (kind == "poisson") {
    detail::check_keys(j, "arrivals", {"kind", "rate_per_s"});
    return PoissonArrivals{detail::get_req<double>(j, "rate_per_s", "arrivals")};
  }
  if (kind == "bursty_on_off") {
    detail::check_keys(j, "arrivals", {"kind", "rate_on_per_s", "on_ns", "off_ns"});
    BurstyOnOffArrivals b;
    b.rate_on_per_s = detail::get_req<double>(j, "rate_on_per_s", "arrivals");
    b.on_duration = detail::get_or<Nanos>(j, "on_ns", b.on_duration, "arrivals");
    b.off_duration = detail::get_or<Nanos>(j, "off_ns", b.off_duration, "arrivals");
    return b;
  }
  if (kind == "deterministic") {
    detail::check_keys(j, "arrivals", {"kind", "interarrival_ns"});
    return DeterministicArrivals{detail::get_req<Nanos>(j, "interarrival_ns", "arrivals")};
  }
  throw ConfigError("arrivals: unknown kind '" + kind + "'");
}

inline Json traffic_to_json(const TrafficModelParams& p) {
  return {{"iterations", p.iterations},
          {"rw_amplification", p.rw_amplification},
          {"bandwidth_bytes_per_s", p.bandwidth_bytes_per_s},
          {"compute_floor_ns", p.compute_floor},
          {"sram_budget_bytes", p.sram_budget}};
}

inline TrafficModelParams traffic_from_json(const Json& j, std::string_view where) {
  TrafficModelParams p;
  p.iterations = detail::get_or(j, "iterations", p.iterations, where);
  p.rw_amplification = detail::get_or(j, "rw_amplification", p.rw_amplification, where);
  p.bandwidth_bytes_per_s =
      detail::get_or(j, "bandwidth_bytes_per_s", p.bandwidth_bytes_per_s, where);
  p.compute_floor = detail::get_or(j, "compute_floor_ns", p.compute_floor, where);
  p.sram_budget = detail::get_req<Bytes>(j, "sram_budget_bytes", where);
  return p;
}

inline Json workload_to_json(const WorkloadModelParams& p) {
  return {{"base_ns", p.base}, {"alpha_ns", p.alpha}, {"cap_ns", detail::opt_json(p.cap)}};
}

inline WorkloadModelParams workload_from_json(const Json& j, std::string_view where) {
  WorkloadModelParams p;
  p.base = detail::get_or(j, "base_ns", p.base, where);
  p.alpha = detail::get_or(j, "alpha_ns", p.alpha, where);
  p.cap = detail::get_opt<Nanos>(j, "cap_ns", where);
  return p;
}

inline Json service_to_json(const ServiceModel& model) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedService>) {
          return {{"kind", "fixed"}, {"service_ns", m.service}};
        } else if constexpr (std::is_same_v<T, TrafficModelParams>) {
          Json j{{"kind", "traffic"}};
          j.update(traffic_to_json(m));
          return j;
        } else if constexpr (std::is_same_v<T, WorkloadModelParams>) {
          Json j{{"kind", "workload"}};
          j.update(workload_to_json(m));
          return j;
        } else {
          Json compute;
          if (const auto* wm = std::get_if<WorkloadModelParams>(&m.compute)) {
            compute = Json{{"kind", "workload"}};
            compute.update(workload_to_json(*wm));
          } else {
            const auto& wb = std::get<WorkBudgetCompute>(m.compute);
            compute = {{"kind", "work_budget"}, {"base_ns", wb.base},
                       {"work_units", wb.work_units}, {"rate_units_per_s", wb.rate_units_per_s}};
          }
          Json jitter = nullptr;
          if (m.jitter)
            jitter = {{"shape", m.jitter->shape}, {"truncation", m.jitter->truncation},
                      {"target", m.jitter->target == JitterTarget::Compute ? "compute" : "total"}};
          return {{"kind", "composite"},
                  {"compute", compute},
                  {"memory", traffic_to_json(m.memory)},
                  {"combine", m.combine == Combine::Max ? "max" : "sum"},
                  {"jitter", jitter}};
        }
      },
      model);
}

inline ServiceModel service_from_json(const Json& j) {
  const auto kind = detail::get_req<std::string>(j, "kind", "service");
  if (kind == "fixed") {
    detail::check_keys(j, "service", {"kind", "service_ns"});
    return FixedService{detail::get_req<Nanos>(j, "service_ns", "service")};
  }
  if (kind == "traffic") {
    detail::check_keys(j, "service", {"kind", "iterations", "rw_amplification",
                                      "bandwidth_bytes_per_s", "compute_floor_ns",
                                      "sram_budget_bytes"});
    return traffic_from_json(j, "service");
  }
  if (kind == "workload") {
    detail::check_keys(j, "service", {"kind", "base_ns", "alpha_ns", "cap_ns"});
    return workload_from_json(j, "service");
  }
  detail::require(kind == "composite", "service: unknown kind '" + kind + "'");
  detail::check_keys(j, "service", {"kind", "compute", "memory", "combine", "jitter"});
  ChmParams p;
  const Json& c = j.at("compute");
  const auto ckind = detail::get_req<std::string>(c, "kind", "service.compute");
  if (ckind == "workload") {
    detail::check_keys(c, "service.compute", {"kind", "base_ns", "alpha_ns", "cap_ns"});
    p.compute = workload_from_json(c, "service.compute");
  } else {
    detail::require(ckind == "work_budget", "service.compute: unknown kind '" + ckind + "'");
    detail::check_keys(c, "service.compute", {"kind", "base_ns", "work_units", "rate_units_per_s"});
    WorkBudgetCompute wb;
    wb.base = detail::get_or(c, "base_ns", wb.base, "service.compute");
    wb.work_units = detail::get_req<double>(c, "work_units", "service.compute");
    wb.rate_units_per_s = detail::get_req<double>(c, "rate_units_per_s", "service.compute");
    p.compute = wb;
  }
  detail::require(j.contains("memory"), "service: composite needs 'memory'");
  detail::check_keys(j.at("memory"), "service.memory",
                     {"iterations", "rw_amplification", "bandwidth_bytes_per_s",
                      "compute_floor_ns", "sram_budget_bytes"});
  p.memory = traffic_from_json(j.at("memory"), "service.memory");
  const auto combine = detail::get_or<std::string>(j, "combine", "max", "service");
  detail::require(combine == "max" || combine == "sum", "service: combine must be max or sum");
  p.combine = combine == "max" ? Combine::Max : Combine::Sum;
  if (j.contains("jitter") && !j.at("jitter").is_null()) {
    const Json& jj = j.at("jitter");
    detail::check_keys(jj, "service.jitter", {"shape", "truncation", "target"});
    JitterParams jp;
    jp.shape = detail::get_or(jj, "shape", jp.shape, "service.jitter");
    jp.truncation = detail::get_or(jj, "truncation", jp.truncation, "service.jitter");
    const auto target = detail::get_or<std::string>(jj, "target", "compute", "service.jitter");
    detail::require(target == "compute" || target == "total",
                    "service.jitter: target must be compute or total");
    jp.target = target == "compute" ? JitterTarget::Compute : JitterTarget::Total;
    p.jitter = jp;
  }
  return p;
}

inline Json policy_to_json(const PolicySet& p) {
  Json trigger = std::visit(
      [](const auto& t) -> Json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, BacklogTrigger>)
          return {{"kind", "backlog"}, {"threshold", t.threshold}};
        else if constexpr (std::is_same_v<T, SlackTrigger>)
          return {{"kind", "slack"}, {"threshold_ns", t.threshold}};
        else
          return {{"kind", "cutoff_hit"}};
      },
      p.rescue.trigger);
  return {{"scheduler", to_string(p.scheduler)},
          {"admission_cap", detail::opt_json(p.admission.cap)},
          {"cutoff_ns", detail::opt_json(p.cutoff)},
          {"rescue",
           {{"enabled", p.rescue.enabled},
            {"trigger", trigger},
            {"budget_ns", p.rescue.budget},
            {"deadline_rule", "inherit_parent"}}}};
}

inline PolicySet policy_from_json(const Json& j) {
  detail::check_keys(j, "policy", {"scheduler", "admission_cap", "cutoff_ns", "rescue"});
  PolicySet p;
  p.scheduler = parse_scheduler(detail::get_or<std::string>(j, "scheduler", "edf", "policy"));
  p.admission.cap = detail::get_opt<std::uint64_t>(j, "admission_cap", "policy");
  p.cutoff = detail::get_opt<Nanos>(j, "cutoff_ns", "policy");
  if (j.contains("rescue") && !j.at("rescue").is_null()) {
    const Json& r = j.at("rescue");
    detail::check_keys(r, "policy.rescue", {"enabled", "trigger", "budget_ns", "deadline_rule"});
    p.rescue.enabled = detail::get_or(r, "enabled", false, "policy.rescue");
    p.rescue.budget = detail::get_or(r, "budget_ns", p.rescue.budget, "policy.rescue");
    const auto rule =
        detail::get_or<std::string>(r, "deadline_rule", "inherit_parent", "policy.rescue");
    detail::require(rule == "inherit_parent",
                    "policy.rescue: deadline_rule must be inherit_parent");
    if (r.contains("trigger") && !r.at("trigger").is_null()) {
      const Json& t = r.at("trigger");
      const auto kind = detail::get_req<std::string>(t, "kind", "policy.rescue.trigger");
      if (kind == "backlog") {
        detail::check_keys(t, "policy.rescue.trigger", {"kind", "threshold"});
        p.rescue.trigger = BacklogTrigger{
            detail::get_req<std::uint64_t>(t, "threshold", "policy.rescue.trigger")};
      } else if (kind == "slack") {
        detail::check_keys(t, "policy.rescue.trigger", {"kind", "threshold_ns"});
        p.rescue.trigger =
            SlackTrigger{detail::get_req<Nanos>(t, "threshold_ns", "policy.rescue.trigger")};
      } else {
        detail::require(kind == "cutoff_hit",
                        "policy.rescue.trigger: unknown kind '" + kind + "'");
        detail::check_keys(t, "policy.rescue.trigger", {"kind"});
        p.rescue.trigger = CutoffHitTrigger{};
      }
    }
  }
  return p;
}

inline Json to_json(const RunConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"label", c.label},
          {"code", code_to_json(c.code)},
          {"organization", to_string(c.organization)},
          {"footprint",
           {{"value_bits", c.footprint.value_bits},
            {"alignment_bytes", c.footprint.alignment_bytes}}},
          {"arrivals", arrivals_to_json(c.arrivals)},
          {"slack_ns", c.slack},
          {"weights",
           {{"checks", c.weights.checks},
            {"rounds", c.weights.rounds},
            {"firing_prob", c.weights.firing_prob}}},
          {"service", service_to_json(c.service)},
          {"policy", policy_to_json(c.policy)},
          {"n_servers", c.n_servers},
          {"n_jobs", c.n_jobs},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

// Parses, resolves derived fields and validates.
inline RunConfig config_from_json(const Json& j) {
  detail::check_keys(j, "config",
                     {"schema_version", "label", "code", "organization", "footprint",
                      "arrivals", "slack_ns", "weights", "service", "policy",
                      "n_servers", "n_jobs", "seed", "output_dir"});
  const int version = detail::get_or(j, "schema_version", kSchemaVersion, "config");
  detail::require(version == kSchemaVersion,
                  "config: unsupported schema_version " + std::to_string(version));
  RunConfig c;
  c.label = detail::get_or<std::string>(j, "label", "", "config");
  if (j.contains("code")) c.code = code_from_json(j.at("code"));
  c.organization = parse_organization(
      detail::get_or<std::string>(j, "organization", "cached_summary", "config"));
  if (j.contains("footprint")) {
    const Json& f = j.at("footprint");
    detail::check_keys(f, "footprint", {"value_bits", "alignment_bytes"});
    c.footprint.value_bits = detail::get_or(f, "value_bits", c.footprint.value_bits, "footprint");
    c.footprint.alignment_bytes =
        detail::get_or(f, "alignment_bytes", c.footprint.alignment_bytes, "footprint");
  }
  detail::require(j.contains("arrivals"), "config: missing 'arrivals'");
  c.arrivals = arrivals_from_json(j.at("arrivals"));
  c.slack = detail::get_req<Nanos>(j, "slack_ns", "config");
  // Weight model defaults to every check of the code over 10 rounds.
  c.weights = WeightModel{c.code.checks_x + c.code.checks_z, 10, 0.01};
  if (j.contains("weights")) {
    const Json& w = j.at("weights");
    detail::check_keys(w, "weights", {"checks", "rounds", "firing_prob"});
    c.weights.checks = detail::get_or(w, "checks", c.weights.checks, "weights");
    c.weights.rounds = detail::get_or(w, "rounds", c.weights.rounds, "weights");
    c.weights.firing_prob = detail::get_or(w, "firing_prob", c.weights.firing_prob, "weights");
  }
  detail::require(j.contains("service"), "config: missing 'service'");
  c.service = service_from_json(j.at("service"));
  if (j.contains("policy")) c.policy = policy_from_json(j.at("policy"));
  c.n_servers = detail::get_or<std::size_t>(j, "n_servers", 1, "config");
  c.n_jobs = detail::get_req<std::size_t>(j, "n_jobs", "config");
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1, "config");
  c.output_dir = detail::get_or<std::string>(j, "output_dir", "", "config");
  resolve(c);
  validate(c);
  return c;
}

inline RunConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace decodeq
