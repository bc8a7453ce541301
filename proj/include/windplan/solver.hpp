#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windplan/domain.hpp"
#include "windplan/objective.hpp"

namespace windplan {

using MwTable = std::map<MunicipalityId, double>;

struct Constraints {
  double cap_obj_mw = 0.0;                           // national added-capacity target
  std::array<std::optional<double>, 3> max_total{};  // caps on summed raw criteria, indexed by Criterion
  MwTable equity_floors;                             // minimum added MW per municipality; empty = none

  const std::optional<double>& cap(Criterion c) const { return max_total[static_cast<int>(c)]; }
  void set_cap(Criterion c, double limit) { max_total[static_cast<int>(c)] = limit; }
  bool has_caps() const;
};

struct CriterionTotals {
  double lcoe = 0.0;
  double scenicness = 0.0;
  double network_length_km = 0.0;

  double of(Criterion c) const;
};

struct Selection {
  std::vector<SiteId> installed;       // ascending
  std::vector<std::uint8_t> decision;  // aligned with Instance::candidates
  double objective = 0.0;
  double capacity_mw = 0.0;
  CriterionTotals totals;
  CriterionTotals means;                     // simple per-turbine means (0 when empty)
  CriterionTotals capacity_weighted_means;   // weighted by turbine capacity
  double lower_bound = 0.0;
  double gap = 0.0;                          // (objective - lower_bound) / lower_bound
  bool proven_optimal = false;               // exact search completed

  struct Diagnostics {
    std::array<double, 3> multipliers{};     // final Lagrange multiplier per capped criterion
    int bisection_iterations = 0;
    std::size_t local_search_moves = 0;
    std::size_t exact_nodes = 0;
  } diagnostics;

  std::size_t count() const { return installed.size(); }
};

struct SolveOptions {
  bool local_search = true;
  // Sites up to which a depth-first exact search refines the heuristic.
  std::size_t exact_max_sites = 40;
  std::size_t exact_node_limit = 4'000'000;
  int max_bisection_iterations = 64;
  // Upper bound on (installed x candidates) pair checks in the cap-aware polish pass.
  std::size_t polish_pair_budget = 30'000'000;
};

// Population-share floors: clamp(pop_j / pop_total * total_target - existing_j, 0, potential_j).
// Existing capacity is read from Municipality::existing_capacity_mw; municipalities
// missing from `potentials` have potential 0.
MwTable equity_floors(const std::vector<Municipality>& municipalities, double total_target_mw,
                      const MwTable& potentials);

// Heuristic with certification: ratio greedy (floors first, then national
// residual), swap/drop local search, Lagrangian bisection for active caps,
// exact refinement on small instances, Lagrangian lower bound.
// InfeasibleError when the target or a cap cannot be met.
Selection solve(const Instance& instance, std::span<const double> site_cost, const Constraints& constraints,
                const SolveOptions& options = {});
Selection solve(const Instance& instance, const Weights& weights, const Constraints& constraints,
                const SolveOptions& options = {});

inline constexpr std::size_t kBruteForceMaxSites = 22;

// Exhaustive enumeration; ties resolve to the lexicographically smallest
// installed id set. Refuses (ValidationError) above kBruteForceMaxSites.
Selection brute_force(const Instance& instance, std::span<const double> site_cost, const Constraints& constraints);
Selection brute_force(const Instance& instance, const Weights& weights, const Constraints& constraints);

// Builds a Selection (totals, means, objective) from per-candidate decisions.
Selection make_selection(const Instance& instance, std::span<const double> site_cost,
                         std::vector<std::uint8_t> decision);

// Every constraint of `constraints` recomputed from raw instance data.
struct FeasibilityCheck {
  bool capacity_ok = true;
  bool caps_ok = true;
  bool floors_ok = true;
  std::string detail;

  bool ok() const { return capacity_ok && caps_ok && floors_ok; }
};
FeasibilityCheck check_feasibility(const Instance& instance, const std::vector<std::uint8_t>& decision,
                                   const Constraints& constraints);

}  // namespace windplan
