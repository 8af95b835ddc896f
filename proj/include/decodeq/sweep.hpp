#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <atomic>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "decodeq/config.hpp"
#include "decodeq/harness.hpp"

namespace decodeq {

// ---------------------------------------------------------------------------
// Regime operating points. Values marked "calibration" are free parameters
// chosen so that each regime exercises its intended effect; all of them are
// plain config fields.

namespace regimes {

inline constexpr std::size_t kJobsDefault = 5000;
inline constexpr std::size_t kJobsTail = 10000;

inline RunConfig base(std::string_view code_key, std::uint64_t seed) {
  RunConfig c;
  c.code = *find_code(code_key);
  c.footprint = FootprintParams{16, 64};
  c.weights = WeightModel{c.code.checks_x + c.code.checks_z, 10, 0.01};
  c.seed = seed;
  return c;
}

// Traffic model with the bounded-iteration operating point.
inline TrafficModelParams traffic_point(Bytes sram_budget) {
  TrafficModelParams t;
  t.iterations = 10;
  t.rw_amplification = 2.0;
  t.bandwidth_bytes_per_s = 64e9;
  t.compute_floor = 500;
  t.sram_budget = sram_budget;
  return t;
}

inline constexpr double kSramFitPoissonRate = 300'000.0;  // calibration

inline RunConfig sram_fit(std::string_view code_key, StateOrganization org,
                          Bytes budget, std::uint64_t seed) {
  RunConfig c = base(code_key, seed);
  c.label = "sram-fit";
  c.organization = org;
  c.arrivals = PoissonArrivals{kSramFitPoissonRate};
  c.slack = us(50);
  c.service = traffic_point(budget);
  c.n_jobs = kJobsDefault;
  resolve(c);
  return c;
}

enum class TailPolicy { CutoffOnly, RescueBacklog, RescueSlack, RescueCutoffHit };

inline constexpr std::array<TailPolicy, 4> kTailPolicies{
    TailPolicy::CutoffOnly, TailPolicy::RescueBacklog, TailPolicy::RescueSlack,
    TailPolicy::RescueCutoffHit};

constexpr std::string_view to_string(TailPolicy p) {
  switch (p) {
    case TailPolicy::CutoffOnly: return "cutoff_only";
    case TailPolicy::RescueBacklog: return "rescue_backlog";
    case TailPolicy::RescueSlack: return "rescue_slack";
    case TailPolicy::RescueCutoffHit: return "rescue_cutoff_hit";
  }
  return "?";
}

inline constexpr double kTailPoissonRate = 5'000.0;  // calibration
inline constexpr Nanos kTailAlpha = us(30);          // calibration, per weight unit

inline RunConfig tail(TailPolicy policy, Nanos cutoff, std::uint64_t seed) {
  RunConfig c = base("bb72", seed);
  c.label = "tail";
  c.organization = StateOrganization::CachedSummary;
  c.arrivals = PoissonArrivals{kTailPoissonRate};
  c.slack = us(100);
  ChmParams chm;
  chm.compute = WorkloadModelParams{us(10), kTailAlpha, std::nullopt};
  chm.memory = traffic_point(8192);  // state stays on chip
  chm.combine = Combine::Max;
  chm.jitter = JitterParams{2.0, 50.0, JitterTarget::Compute};
  c.service = chm;
  c.policy.cutoff = cutoff;
  c.policy.rescue.budget = us(10);
  c.policy.rescue.enabled = policy != TailPolicy::CutoffOnly;
  switch (policy) {
    case TailPolicy::CutoffOnly:
    case TailPolicy::RescueBacklog: c.policy.rescue.trigger = BacklogTrigger{2}; break;
    case TailPolicy::RescueSlack: c.policy.rescue.trigger = SlackTrigger{us(5)}; break;
    case TailPolicy::RescueCutoffHit: c.policy.rescue.trigger = CutoffHitTrigger{}; break;
  }
  c.n_jobs = kJobsTail;
  resolve(c);
  return c;
}

inline std::vector<Nanos> tail_cutoffs() {
  return {us(20), us(30), us(50), us(70), us(100)};
}

inline constexpr double kQosOverloadRate = 80'000.0;
inline constexpr double kQosLightRate = 20'000.0;

inline RunConfig qos(double rate_on, std::optional<std::uint64_t> cap, std::uint64_t seed) {
  RunConfig c = base("bb144", seed);
  c.label = "qos";
  c.organization = StateOrganization::CachedSummary;
  c.arrivals = BurstyOnOffArrivals{rate_on};  // default on/off shape
  c.slack = us(100);
  c.service = FixedService{us(20)};
  c.policy.admission.cap = cap;
  c.n_jobs = kJobsDefault;
  return c;
}

// Unbounded is represented as nullopt.
inline std::vector<std::optional<std::uint64_t>> qos_caps() {
  return {10, 20, 40, 80, 160, 320, std::nullopt};
}

inline RunConfig capacity(std::size_t n_servers, std::uint64_t seed) {
  RunConfig c = qos(kQosOverloadRate, std::nullopt, seed);
  c.label = "capacity";
  c.n_servers = n_servers;
  return c;
}

inline std::vector<std::size_t> capacity_servers() { return {1, 2, 4}; }

}  // namespace regimes

// ---------------------------------------------------------------------------
// Sweep execution.

struct SweepCell {
  std::string name;
  RunConfig config;
};

struct SweepOptions {
  std::uint64_t seed = 1;
  std::optional<fs::path> out_dir;  // per-cell artifacts when set
  unsigned threads = 0;             // 0: hardware concurrency
};

struct CellResult {
  ServiceMetrics metrics;
};

// Cells are independent single-threaded simulations; results come back in
// cell order regardless of scheduling.
inline std::vector<CellResult> run_cells(const std::vector<SweepCell>& cells,
                                         const SweepOptions& opt) {
  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cells.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const auto& cell = cells[i];
        const RunLog log = run(cell.config);
        results[i].metrics =
            opt.out_dir ? emit_artifacts(log, cell.config, *opt.out_dir / "cells" / cell.name)
                        : summarize(log, metrics_options(cell.config));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// Flattened leaf-path differences between two JSON documents.
inline std::vector<std::string> json_diff(const Json& a, const Json& b,
                                          const std::string& path = "") {
  std::vector<std::string> out;
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, v] : a.items()) keys.insert(k);
    for (const auto& [k, v] : b.items()) keys.insert(k);
    for (const auto& k : keys) {
      const std::string p = path + "/" + k;
      if (!a.contains(k) || !b.contains(k)) {
        out.push_back(p);
        continue;
      }
      auto sub = json_diff(a.at(k), b.at(k), p);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  } else if (a != b) {
    out.push_back(path.empty() ? "/" : path);
  }
  return out;
}

namespace detail {

inline std::string cap_name(std::optional<std::uint64_t> cap) {
  return cap ? std::to_string(*cap) : "unbounded";
}

inline void write_table(const SweepOptions& opt, std::string_view regime,
                        const std::vector<SweepCell>& cells, const std::string& table) {
  if (!opt.out_dir) return;
  fs::create_directories(*opt.out_dir);
  Json meta{{"schema_version", kSchemaVersion}, {"regime", regime}, {"seed", opt.seed}};
  Json names = Json::array();
  for (const auto& c : cells) names.push_back(c.name);
  meta["cells"] = names;
  write_file(*opt.out_dir / "sweep.json", meta.dump(2) + "\n");
  write_file(*opt.out_dir / "table.csv", table);
}

// Shortest decimal form that round-trips to the same double.
inline std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

// ---- SRAM fit ---------------------------------------------------------------

struct SramFitRow {
  std::string code;
  StateOrganization org{};
  Bytes budget = 0;
  Bytes b_state = 0;
  Bytes b_excess = 0;
  double v_off_iter = 0.0;
  double v_off_tot = 0.0;
  Nanos s_mem = 0;
  Nanos s_total = 0;
  std::optional<Bytes> boundary;
  double miss_rate = 0.0;
  Nanos p99 = 0;
};

inline std::vector<SweepCell> sram_fit_cells(std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (const auto& code : builtin_codes())
    for (auto org : {StateOrganization::EdgeCentric, StateOrganization::CachedSummary})
      for (Bytes b : default_budget_grid())
        cells.push_back({code.name + "_" + std::string(to_string(org)) + "_" + std::to_string(b),
                         regimes::sram_fit(code.name, org, b, seed)});
  return cells;
}

// Cost quantities of one SRAM-fit cell; independent of the simulation.
inline SramFitRow sram_fit_costs(const RunConfig& c) {
  const auto& tm = std::get<TrafficModelParams>(c.service);
  const auto grid = default_budget_grid();
  SramFitRow r;
  r.code = c.code.name;
  r.org = c.organization;
  r.budget = tm.sram_budget;
  r.b_state = tm.footprint;
  r.b_excess = excess_bytes(tm.footprint, tm.sram_budget);
  const auto traffic = offchip_traffic(r.b_excess, tm.rw_amplification, tm.iterations);
  r.v_off_iter = traffic.per_iter;
  r.v_off_tot = traffic.total;
  const auto s = tm_service(tm);
  r.s_mem = s.memory;
  r.s_total = s.total;
  r.boundary = fit_boundary(tm.footprint, grid);
  return r;
}

inline std::string sram_fit_table(const std::vector<SramFitRow>& rows) {
  std::ostringstream os;
  os << "code,org,budget_bytes,b_state_bytes,b_excess_bytes,v_off_iter_bytes,"
        "v_off_tot_bytes,s_mem_ns,s_total_ns,boundary_bytes,miss_rate,p99_ns\n";
  for (const auto& r : rows)
    os << r.code << ',' << to_string(r.org) << ',' << r.budget << ',' << r.b_state << ','
       << r.b_excess << ',' << detail::fmt(r.v_off_iter) << ',' << detail::fmt(r.v_off_tot)
       << ',' << r.s_mem << ',' << r.s_total << ','
       << (r.boundary ? std::to_string(*r.boundary) : "beyond_grid") << ','
       << detail::fmt(r.miss_rate) << ',' << r.p99 << '\n';
  return os.str();
}

inline std::vector<SramFitRow> run_sram_fit_sweep(const SweepOptions& opt = {}) {
  const auto cells = sram_fit_cells(opt.seed);
  const auto results = run_cells(cells, opt);
  std::vector<SramFitRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto r = sram_fit_costs(cells[i].config);
    r.miss_rate = results[i].metrics.miss_rate;
    r.p99 = results[i].metrics.response_p99;
    rows.push_back(r);
  }
  detail::write_table(opt, "sram-fit", cells, sram_fit_table(rows));
  return rows;
}

// ---- Tail latency -----------------------------------------------------------

struct TailRow {
  regimes::TailPolicy policy{};
  Nanos cutoff = 0;
  Nanos p99 = 0;
  double miss_rate = 0.0;
  double trigger_rate = 0.0;
};

inline std::vector<SweepCell> tail_cells(std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (auto p : regimes::kTailPolicies)
    for (Nanos t : regimes::tail_cutoffs())
      cells.push_back({std::string(to_string(p)) + "_" + std::to_string(t / 1000) + "us",
                       regimes::tail(p, t, seed)});
  return cells;
}

inline std::string tail_table(const std::vector<TailRow>& rows) {
  std::ostringstream os;
  os << "policy,cutoff_ns,p99_ns,miss_rate,trigger_rate\n";
  for (const auto& r : rows)
    os << to_string(r.policy) << ',' << r.cutoff << ',' << r.p99 << ','
       << detail::fmt(r.miss_rate) << ',' << detail::fmt(r.trigger_rate) << '\n';
  return os.str();
}

inline std::vector<TailRow> run_tail_sweep(const SweepOptions& opt = {}) {
  const auto cells = tail_cells(opt.seed);
  const auto results = run_cells(cells, opt);
  std::vector<TailRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& m = results[i].metrics;
    rows.push_back({regimes::kTailPolicies[i / regimes::tail_cutoffs().size()],
                    *cells[i].config.policy.cutoff, m.response_p99, m.miss_rate,
                    m.trigger_rate});
  }
  detail::write_table(opt, "tail", cells, tail_table(rows));
  return rows;
}

// ---- QoS --------------------------------------------------------------------

struct QosRow {
  double rate_on = 0.0;
  std::optional<std::uint64_t> cap;
  double drop_rate = 0.0;
  double miss_rate = 0.0;
  double goodput = 0.0;
  std::uint64_t max_backlog = 0;
  Nanos p99 = 0;
};

inline std::vector<SweepCell> qos_cells(std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (double rate : {regimes::kQosLightRate, regimes::kQosOverloadRate})
    for (auto cap : regimes::qos_caps())
      cells.push_back({"rate" + std::to_string(static_cast<long>(rate)) + "_cap" +
                           detail::cap_name(cap),
                       regimes::qos(rate, cap, seed)});
  return cells;
}

inline std::string qos_table(const std::vector<QosRow>& rows) {
  std::ostringstream os;
  os << "rate_on_per_s,cap,drop_rate,miss_rate,goodput,max_backlog,p99_ns\n";
  for (const auto& r : rows)
    os << static_cast<long>(r.rate_on) << ',' << detail::cap_name(r.cap) << ','
       << detail::fmt(r.drop_rate) << ',' << detail::fmt(r.miss_rate) << ','
       << detail::fmt(r.goodput) << ',' << r.max_backlog << ',' << r.p99 << '\n';
  return os.str();
}

inline std::vector<QosRow> run_qos_sweep(const SweepOptions& opt = {}) {
  const auto cells = qos_cells(opt.seed);
  const auto results = run_cells(cells, opt);
  std::vector<QosRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i].config;
    const auto& m = results[i].metrics;
    rows.push_back({std::get<BurstyOnOffArrivals>(c.arrivals).rate_on_per_s,
                    c.policy.admission.cap, m.drop_rate, m.miss_rate, m.goodput,
                    m.max_backlog, m.response_p99});
  }
  detail::write_table(opt, "qos", cells, qos_table(rows));
  return rows;
}

// ---- Capacity ---------------------------------------------------------------

struct CapacityRow {
  std::size_t n_servers = 1;
  double miss_rate = 0.0;
  std::uint64_t max_backlog = 0;
  Nanos p99 = 0;
};

inline std::vector<SweepCell> capacity_cells(std::uint64_t seed) {
  std::vector<SweepCell> cells;
  for (auto n : regimes::capacity_servers())
    cells.push_back({"servers" + std::to_string(n), regimes::capacity(n, seed)});
  return cells;
}

inline std::string capacity_table(const std::vector<CapacityRow>& rows) {
  std::ostringstream os;
  os << "n_servers,miss_rate,max_backlog,p99_ns\n";
  for (const auto& r : rows)
    os << r.n_servers << ',' << detail::fmt(r.miss_rate) << ',' << r.max_backlog << ','
       << r.p99 << '\n';
  return os.str();
}

inline std::vector<CapacityRow> run_capacity_sweep(const SweepOptions& opt = {}) {
  const auto cells = capacity_cells(opt.seed);
  const auto results = run_cells(cells, opt);
  std::vector<CapacityRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& m = results[i].metrics;
    rows.push_back({cells[i].config.n_servers, m.miss_rate, m.max_backlog, m.response_p99});
  }
  detail::write_table(opt, "capacity", cells, capacity_table(rows));
  return rows;
}

// ---------------------------------------------------------------------------
// Figure-ready CSVs from a sweep directory's table.csv. Returns the files
// written.

namespace detail {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw LogFormatError("table.csv: missing column '" + std::string(name) + "'");
  }
};

inline Table read_table(const fs::path& path) {
  const std::string text = read_file(path);
  Table t;
  const auto lines = split_lines(text, path.string());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string> f;
    for (auto sv : split_fields(lines[i])) f.emplace_back(sv);
    if (i == 0) {
      t.header = std::move(f);
    } else {
      if (f.size() != t.header.size())
        throw LogFormatError(path.string() + ": ragged row " + std::to_string(i + 1));
      t.rows.push_back(std::move(f));
    }
  }
  return t;
}

// Nanoseconds as microseconds with exact decimal output.
inline std::string ns_to_us(const std::string& ns) {
  const auto v = parse_num<Nanos>(ns, "table.csv");
  std::ostringstream os;
  os << v / 1000;
  if (v % 1000) {
    std::string frac = std::to_string(1000 + v % 1000).substr(1);
    while (frac.back() == '0') frac.pop_back();
    os << '.' << frac;
  }
  return os.str();
}

}  // namespace detail

inline std::vector<fs::path> plot_data(const fs::path& sweep_dir) {
  const Json meta = Json::parse(read_file(sweep_dir / "sweep.json"));
  const auto regime = meta.at("regime").get<std::string>();
  const auto t = detail::read_table(sweep_dir / "table.csv");
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& header,
                  const std::function<std::string(const std::vector<std::string>&)>& row) {
    std::ostringstream os;
    os << header << '\n';
    for (const auto& r : t.rows) os << row(r) << '\n';
    const auto path = sweep_dir / name;
    write_file(path, os.str());
    written.push_back(path);
  };
  if (regime == "sram-fit") {
    const auto code = t.col("code"), org = t.col("org"), budget = t.col("budget_bytes"),
               traffic = t.col("v_off_tot_bytes"), smem = t.col("s_mem_ns");
    emit("fig_offchip_traffic.csv", "code,org,sram_budget_bytes,offchip_bytes_per_job,s_mem_us",
         [&](const auto& r) {
           return r[code] + ',' + r[org] + ',' + r[budget] + ',' + r[traffic] + ',' +
                  detail::ns_to_us(r[smem]);
         });
  } else if (regime == "tail") {
    const auto pol = t.col("policy"), cut = t.col("cutoff_ns"), p99 = t.col("p99_ns"),
               miss = t.col("miss_rate"), trig = t.col("trigger_rate");
    emit("fig_tail_p99.csv", "policy,cutoff_us,p99_us", [&](const auto& r) {
      return r[pol] + ',' + detail::ns_to_us(r[cut]) + ',' + detail::ns_to_us(r[p99]);
    });
    emit("fig_tail_miss.csv", "policy,cutoff_us,miss_rate", [&](const auto& r) {
      return r[pol] + ',' + detail::ns_to_us(r[cut]) + ',' + r[miss];
    });
    emit("fig_tail_trigger.csv", "policy,cutoff_us,trigger_rate", [&](const auto& r) {
      return r[pol] + ',' + detail::ns_to_us(r[cut]) + ',' + r[trig];
    });
  } else if (regime == "qos") {
    const auto rate = t.col("rate_on_per_s"), cap = t.col("cap"), drop = t.col("drop_rate"),
               miss = t.col("miss_rate");
    emit("fig_qos_drop.csv", "rate_on_per_s,cap,drop_rate",
         [&](const auto& r) { return r[rate] + ',' + r[cap] + ',' + r[drop]; });
    emit("fig_qos_miss.csv", "rate_on_per_s,cap,miss_rate",
         [&](const auto& r) { return r[rate] + ',' + r[cap] + ',' + r[miss]; });
  } else if (regime == "capacity") {
    const auto n = t.col("n_servers"), miss = t.col("miss_rate"), bl = t.col("max_backlog");
    emit("fig_capacity_backlog.csv", "n_servers,max_backlog",
         [&](const auto& r) { return r[n] + ',' + r[bl]; });
    emit("fig_capacity_miss.csv", "n_servers,miss_rate",
         [&](const auto& r) { return r[n] + ',' + r[miss]; });
  } else {
    throw LogFormatError("sweep.json: unknown regime '" + regime + "'");
  }
  return written;
}

}  // namespace decodeq
