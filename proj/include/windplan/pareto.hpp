#pragma once

#include <string>
#include <vector>

#include "windplan/objective.hpp"
#include "windplan/solver.hpp"

namespace windplan {

struct SweepSpec {
  Criterion optimize = Criterion::Lcoe;
  Criterion sweep = Criterion::Scenicness;
  int steps = 10;             // number of front points, including the unconstrained one
  double step_factor = 0.9;   // cap multiplier per step
};

struct ParetoPoint {
  int step = 0;
  double cap = 0.0;           // cap on the swept criterion total; step 0 records T0
  double achieved_min = 0.0;  // summed raw value of the optimized criterion
  double swept_total = 0.0;
  Selection selection;
};

struct ParetoFront {
  SweepSpec spec;
  double anchor_total = 0.0;  // T0
  std::vector<ParetoPoint> points;
  bool terminated_early = false;
  std::string termination_reason;
};

// Point 0 minimizes `optimize` under `base`; its total of `sweep` is T0.
// Point k minimizes `optimize` with the swept total capped at
// T0 * step_factor^k. The first infeasible cap ends the front (flagged).
// A point is replaced by the next tighter point's selection whenever that
// one is cheaper, so achieved minima never decrease along the front.
// Points k >= 1 are solved on up to `threads` workers.
ParetoFront pareto_sweep(const Instance& instance, const SweepSpec& spec, const Constraints& base,
                         const SolveOptions& options = {}, std::size_t threads = 1);

}  // namespace windplan
