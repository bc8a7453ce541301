#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "windplan/errors.hpp"
#include "windplan/pareto.hpp"

using namespace windplan;

namespace {

Weights single(Criterion c) {
  Weights w;
  if (c == Criterion::Lcoe) w.lcoe = 1;
  if (c == Criterion::Scenicness) w.scenicness = 1;
  if (c == Criterion::NetworkLength) w.network_length = 1;
  return w;
}

}  // namespace

TEST(Pareto, SingleStepIsUnconstrainedOptimum) {
  std::mt19937_64 rng(1);
  testkit::RandomInstanceOptions o;
  o.sites = 12;
  const Instance inst = testkit::random_instance(rng, o);
  Constraints base;
  base.cap_obj_mw = 15.0;
  SweepSpec spec;
  spec.steps = 1;
  const auto front = pareto_sweep(inst, spec, base);
  ASSERT_EQ(front.points.size(), 1u);
  const auto bf = brute_force(inst, single(spec.optimize), base);
  EXPECT_NEAR(front.points[0].achieved_min, bf.objective, 1e-9);
  EXPECT_EQ(front.points[0].cap, front.anchor_total);
  EXPECT_FALSE(front.terminated_early);
}

TEST(Pareto, RejectsBadSpecs) {
  const Instance inst = testkit::three_site_instance();
  Constraints base;
  base.cap_obj_mw = 2.0;
  SweepSpec same;
  same.sweep = same.optimize;
  EXPECT_THROW(pareto_sweep(inst, same, base), ValidationError);
  SweepSpec zero;
  zero.steps = 0;
  EXPECT_THROW(pareto_sweep(inst, zero, base), ValidationError);
}

TEST(Pareto, MonotoneAndMatchesBruteForce) {
  std::mt19937_64 rng(2);
  const Criterion pairs[][2] = {{Criterion::Lcoe, Criterion::Scenicness},
                                {Criterion::Scenicness, Criterion::NetworkLength},
                                {Criterion::NetworkLength, Criterion::Lcoe}};
  for (int trial = 0; trial < 18; ++trial) {
    testkit::RandomInstanceOptions o;
    o.sites = 8 + trial % 8;
    o.municipalities = 3;
    const Instance inst = testkit::random_instance(rng, o);
    Constraints base;
    double potential = 0.0;
    for (const auto& s : inst.candidates) potential += s.capacity_mw;
    base.cap_obj_mw = 0.4 * potential;
    if (trial % 3 == 0) {
      for (const auto& [id, p] : municipal_potentials(inst)) base.equity_floors[id] = 0.2 * p;
    }
    SweepSpec spec;
    spec.optimize = pairs[trial % 3][0];
    spec.sweep = pairs[trial % 3][1];
    spec.steps = 12;
    const auto front = pareto_sweep(inst, spec, base, {}, 2);
    for (std::size_t k = 1; k < front.points.size(); ++k) {
      EXPECT_GE(front.points[k].achieved_min, front.points[k - 1].achieved_min);
      EXPECT_LE(front.points[k].swept_total, front.points[k].cap * (1 + 1e-9));
    }
    for (const auto& p : front.points) {
      Constraints c = base;
      if (p.step > 0) c.set_cap(spec.sweep, p.cap);
      const auto bf = brute_force(inst, single(spec.optimize), c);
      EXPECT_NEAR(p.achieved_min, bf.objective, 1e-9 * std::max(1.0, bf.objective)) << "step " << p.step;
    }
    if (front.terminated_early) {
      const std::size_t next = front.points.size();
      Constraints c = base;
      c.set_cap(spec.sweep, front.anchor_total * std::pow(spec.step_factor, static_cast<double>(next)));
      EXPECT_THROW(brute_force(inst, single(spec.optimize), c), InfeasibleError);
      EXPECT_FALSE(front.termination_reason.empty());
    }
  }
}

TEST(Pareto, LargerFrontIsMonotone) {
  std::mt19937_64 rng(3);
  testkit::RandomInstanceOptions o;
  o.sites = 1500;
  o.municipalities = 40;
  const Instance inst = testkit::random_instance(rng, o);
  Constraints base;
  base.cap_obj_mw = 600.0;
  SweepSpec spec;
  spec.steps = 10;
  const auto front = pareto_sweep(inst, spec, base);
  for (std::size_t k = 1; k < front.points.size(); ++k) {
    EXPECT_GE(front.points[k].achieved_min, front.points[k - 1].achieved_min);
  }
  for (const auto& p : front.points) {
    std::string why;
    Constraints c = base;
    if (p.step > 0) c.set_cap(spec.sweep, p.cap);
    EXPECT_TRUE(testkit::independently_feasible(inst, p.selection.decision, c, &why)) << why;
  }
}
