#include "windplan/pareto.hpp"

#include <cmath>
#include <optional>

#include "windplan/errors.hpp"
#include "windplan/parallel.hpp"

namespace windplan {

namespace {

Weights single(Criterion c) {
  Weights w;
  switch (c) {
    case Criterion::Lcoe: w.lcoe = 1.0; break;
    case Criterion::Scenicness: w.scenicness = 1.0; break;
    case Criterion::NetworkLength: w.network_length = 1.0; break;
  }
  return w;
}

}  // namespace

ParetoFront pareto_sweep(const Instance& instance, const SweepSpec& spec, const Constraints& base,
                         const SolveOptions& options, std::size_t threads) {
  if (spec.optimize == spec.sweep) throw ValidationError("sweep and optimize criteria must differ");
  if (spec.steps < 1) throw ValidationError("sweep needs at least one step");
  if (!(spec.step_factor > 0.0 && spec.step_factor < 1.0)) throw ValidationError("step factor must lie in (0, 1)");

  ParetoFront front;
  front.spec = spec;
  const Weights weights = single(spec.optimize);

  ParetoPoint first;
  first.selection = solve(instance, weights, base, options);
  first.achieved_min = first.selection.objective;
  first.swept_total = first.selection.totals.of(spec.sweep);
  front.anchor_total = first.swept_total;
  first.cap = front.anchor_total;
  front.points.push_back(std::move(first));

  const auto later = static_cast<std::size_t>(spec.steps - 1);
  std::vector<std::optional<Selection>> solved(later);
  std::vector<std::string> failure(later);
  parallel_for(later, threads, [&](std::size_t q) {
    Constraints c = base;
    c.set_cap(spec.sweep, front.anchor_total * std::pow(spec.step_factor, static_cast<double>(q + 1)));
    try {
      solved[q] = solve(instance, weights, c, options);
    } catch (const InfeasibleError& e) {
      failure[q] = e.what();
    }
  });

  for (std::size_t q = 0; q < later; ++q) {
    if (!solved[q]) {
      front.terminated_early = true;
      front.termination_reason = "step " + std::to_string(q + 1) + ": " + failure[q];
      break;
    }
    ParetoPoint p;
    p.step = static_cast<int>(q + 1);
    p.cap = front.anchor_total * std::pow(spec.step_factor, static_cast<double>(q + 1));
    p.selection = std::move(*solved[q]);
    front.points.push_back(std::move(p));
  }

  // A tighter point's selection is feasible for every looser cap.
  for (std::size_t k = front.points.size() - 1; k-- > 0;) {
    const Selection& tighter = front.points[k + 1].selection;
    Selection& here = front.points[k].selection;
    if (tighter.objective < here.objective) {
      const double bound = here.lower_bound;
      here = tighter;
      here.lower_bound = std::min(bound, here.objective);
      here.proven_optimal = false;
      here.gap = here.lower_bound > 0.0 ? (here.objective - here.lower_bound) / here.lower_bound
                                        : (here.objective == 0.0 ? 0.0 : INFINITY);
    }
  }
  for (ParetoPoint& p : front.points) {
    p.achieved_min = p.selection.objective;
    p.swept_total = p.selection.totals.of(spec.sweep);
  }
  return front;
}

}  // namespace windplan
