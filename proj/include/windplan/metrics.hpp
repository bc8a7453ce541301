#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windplan/domain.hpp"

namespace windplan {

// Gini index via the sorted-form identity
//   G = sum_i (2i - M - 1) x_(i) / (M * sum x),  x sorted ascending, i = 1..M,
// which equals sum_j sum_k |x_j - x_k| / (2 M^2 mean). Zero when sum x == 0.
double gini(std::span<const double> x);

struct EquityReport {
  std::vector<MunicipalityId> municipality_ids;  // included municipalities, instance order
  std::vector<double> x;                         // MW per inhabitant
  double gini = 0.0;
  double regional_equity_pct = 100.0;            // (1 - gini) * 100
  std::size_t excluded_zero_population = 0;
  bool all_zero = false;                         // every x_j is zero; gini reported as 0
};

// `decision` is aligned with instance.candidates.
EquityReport regional_equity(const Instance& instance, const std::vector<std::uint8_t>& decision,
                             bool include_existing = true);

struct SouthQuota {
  double pct = 0.0;
  double south_mw = 0.0;
  double added_mw = 0.0;
  bool nothing_added = false;
};

// Share of added capacity sited in South municipalities.
SouthQuota south_quota(const Instance& instance, const std::vector<std::uint8_t>& decision);

struct StateStats {
  std::int64_t state_id = 0;
  double area_km2 = 0.0;
  std::size_t turbines = 0;
  double capacity_mw = 0.0;
  double turbines_per_1000_km2 = 0.0;
  double capacity_share_pct = 0.0;
  std::optional<double> mean_scenicness;  // absent without installed sites
};

struct RegionalStats {
  std::vector<StateStats> states;  // ascending state_id
  SouthQuota south;
};

RegionalStats regional_stats(const Instance& instance, const std::vector<std::uint8_t>& decision);

inline constexpr std::size_t kRadarAxes = 4;  // lcoe, scenicness, network length, equity

struct RadarInput {
  std::string name;
  std::string group;
  std::array<double, kRadarAxes> values{};
};

struct RadarRow {
  std::string name;
  std::string group;
  std::array<double, kRadarAxes> values{};      // min-max scaled within the group
  std::array<bool, kRadarAxes> degenerate{};    // axis constant within the group
};

// Output follows input order; the scaling depends only on group membership.
std::vector<RadarRow> radar_values(const std::vector<RadarInput>& inputs);

}  // namespace windplan
