#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "windplan/metrics.hpp"
#include "windplan/objective.hpp"
#include "windplan/solver.hpp"

namespace windplan {

inline constexpr double kBaseTotalCapacityMw = 105000.0;
inline constexpr double kHighTotalCapacityMw = 200000.0;

struct ScenarioConfig {
  std::string name;
  Weights weights;
  bool equity = false;
  double total_capacity_mw = kBaseTotalCapacityMw;  // total installed capacity aimed for, before --scale
  std::array<std::optional<double>, 3> max_total{};  // optional caps, indexed by Criterion
};

// The 14 scenarios, in table order: Base_{LCOE,Scenic,Network,all} and
// High_{LCOE,Scenic,Network}, each followed by its equity twin "_E".
std::vector<ScenarioConfig> builtin_grid();

// JSON list of {name, w_c, w_s, w_l, equity, total_capacity_mw} with optional
// max_total_lcoe / max_total_scenicness / max_total_network_length_km.
std::vector<ScenarioConfig> parse_grid_json(const std::string& text);
// A single scenario object in the same format.
ScenarioConfig parse_scenario_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& config);

struct ScenarioResult {
  std::string name;
  ScenarioConfig config;
  bool ok = false;
  std::string error;
  double total_target_mw = 0.0;   // scaled total
  double added_target_mw = 0.0;   // scaled total minus existing
  Selection selection;
  double equity_pct = 0.0;
  double south_quota_pct = 0.0;
  double runtime_s = 0.0;         // kept out of results.csv
};

struct GridOptions {
  double scale = 1.0;
  SolveOptions solve;
  std::size_t threads = 1;
};

struct ScenarioProblem {
  Constraints constraints;
  double total_target_mw = 0.0;
};

// Constraints for one scenario on an instance. ValidationError when the
// scaled total does not exceed the existing capacity.
ScenarioProblem scenario_constraints(const Instance& instance, const ScenarioConfig& config, double scale,
                                     const MwTable* cached_floors = nullptr);

// Solves each scenario; rows follow grid order. A scenario whose added target
// exceeds the instance potential aborts the whole grid (InfeasibleError
// naming it); any other per-scenario failure is recorded in its row.
std::vector<ScenarioResult> run_grid(const Instance& instance, const std::vector<ScenarioConfig>& grid,
                                     const GridOptions& options = {});

std::string results_csv(const std::vector<ScenarioResult>& results);

// Group = name prefix before the first '_'; failed scenarios are skipped.
std::vector<RadarRow> scenario_radar(const std::vector<ScenarioResult>& results);
std::string radar_csv(const std::vector<RadarRow>& rows);

}  // namespace windplan
