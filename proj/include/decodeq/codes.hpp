#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decodeq/errors.hpp"
#include "decodeq/time.hpp"

namespace decodeq {

// Size parameters of a stabilizer code. Only the counts matter to the cost
// models, so no parity-check matrix is stored.
struct CodeSpec {
  std::string name;
  std::uint64_t n_data = 0;     // variable nodes
  std::uint64_t checks_x = 0;
  std::uint64_t checks_z = 0;
  std::uint64_t row_weight = 0;  // nonzeros per check row
  std::optional<std::uint64_t> k_logical;  // metadata only

  bool operator==(const CodeSpec&) const = default;
};

inline void validate(const CodeSpec& code) {
  detail::require(!code.name.empty(), "code: name must be nonempty");
  detail::require(code.n_data > 0, "code '" + code.name + "': n_data must be > 0");
  detail::require(code.checks_x + code.checks_z > 0,
                  "code '" + code.name + "': needs at least one check row");
  detail::require(code.row_weight > 0,
                  "code '" + code.name + "': row_weight must be > 0");
}

// Bivariate bicycle code of length n: n/2 X checks and n/2 Z checks, each of
// weight 6.
inline CodeSpec bivariate_bicycle(std::uint64_t n, std::uint64_t k) {
  return CodeSpec{"bb" + std::to_string(n), n, n / 2, n / 2, 6, k};
}

inline std::span<const CodeSpec> builtin_codes() {
  static const std::array<CodeSpec, 3> codes{
      bivariate_bicycle(72, 12),
      bivariate_bicycle(144, 12),
      bivariate_bicycle(288, 12),
  };
  return codes;
}

inline std::optional<CodeSpec> find_code(std::string_view key) {
  for (const auto& c : builtin_codes())
    if (c.name == key) return c;
  return std::nullopt;
}

struct TannerCounts {
  std::uint64_t variables = 0;
  std::uint64_t checks = 0;
  std::uint64_t edges = 0;

  bool operator==(const TannerCounts&) const = default;
};

// Counts over the X and Z check graphs combined.
constexpr TannerCounts tanner_counts(const CodeSpec& code) {
  const auto checks = code.checks_x + code.checks_z;
  return {code.n_data, checks, code.row_weight * checks};
}

enum class StateOrganization { EdgeCentric, CachedSummary };

constexpr std::string_view to_string(StateOrganization org) {
  return org == StateOrganization::EdgeCentric ? "edge_centric"
                                               : "cached_summary";
}

inline StateOrganization parse_organization(std::string_view s) {
  if (s == "edge_centric") return StateOrganization::EdgeCentric;
  if (s == "cached_summary") return StateOrganization::CachedSummary;
  throw ConfigError("unknown state organization '" + std::string(s) + "'");
}

struct FootprintParams {
  unsigned value_bits = 16;
  Bytes alignment_bytes = 64;

  bool operator==(const FootprintParams&) const = default;
};

inline void validate(const FootprintParams& p) {
  detail::require(p.value_bits == 8 || p.value_bits == 16 || p.value_bits == 32,
                  "footprint: value_bits must be 8, 16 or 32");
  detail::require(p.alignment_bytes > 0 &&
                      (p.alignment_bytes & (p.alignment_bytes - 1)) == 0,
                  "footprint: alignment_bytes must be a power of two");
}

constexpr Bytes align_up(Bytes x, Bytes alignment) {
  return (x + alignment - 1) / alignment * alignment;
}

// Persistent decoder state in bytes. Edge-centric state keeps two directed
// messages per Tanner edge; cached-summary state keeps one belief per
// variable and one summary per check.
constexpr Bytes state_footprint(StateOrganization org, const TannerCounts& counts,
                                const FootprintParams& params) {
  const Bytes value_bytes = params.value_bits / 8;
  const Bytes raw = org == StateOrganization::EdgeCentric
                        ? 2 * counts.edges * value_bytes
                        : (counts.variables + counts.checks) * value_bytes;
  return align_up(raw, params.alignment_bytes);
}

inline Bytes state_footprint(const CodeSpec& code, StateOrganization org,
                             const FootprintParams& params) {
  return state_footprint(org, tanner_counts(code), params);
}

// On-chip budget grid swept by the SRAM-fit regime.
inline std::vector<Bytes> default_budget_grid() {
  return {128, 256, 512, 1024, 2048, 4096, 8192};
}

// Smallest budget on the grid that holds the state, or nullopt when the state
// is larger than every grid point.
inline std::optional<Bytes> fit_boundary(Bytes b_state,
                                         std::span<const Bytes> budget_grid) {
  detail::require(!budget_grid.empty(), "fit_boundary: empty budget grid");
  detail::require(std::adjacent_find(budget_grid.begin(), budget_grid.end(),
                                     [](Bytes a, Bytes b) { return a >= b; }) ==
                      budget_grid.end(),
                  "fit_boundary: budget grid must be strictly increasing");
  auto it = std::lower_bound(budget_grid.begin(), budget_grid.end(), b_state);
  if (it == budget_grid.end()) return std::nullopt;
  return *it;
}

}  // namespace decodeq
