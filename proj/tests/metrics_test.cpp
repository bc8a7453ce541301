#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "windplan/metrics.hpp"

using namespace windplan;

namespace {

// One site per municipality, capacity c_j, population p_j, no existing stock.
Instance per_capita(const std::vector<double>& capacity, const std::vector<double>& population) {
  Instance inst;
  for (std::size_t j = 0; j < capacity.size(); ++j) {
    Municipality m;
    m.municipality_id = static_cast<MunicipalityId>(j + 1);
    m.population = population[j];
    m.area_km2 = 10.0 * (j + 1);
    m.state_id = static_cast<std::int64_t>(j % 2 + 1);
    m.region = j == 0 ? Region::South : Region::NonSouth;
    inst.municipalities.push_back(m);
    CandidateSite c;
    c.site_id = static_cast<SiteId>(j + 1);
    c.municipality_id = m.municipality_id;
    c.capacity_mw = capacity[j] > 0 ? capacity[j] : 1.0;
    c.lcoe_ct_kwh = 5.0;
    c.scenicness = 2.0 + static_cast<double>(j);
    c.network_length_km = 1.0;
    inst.candidates.push_back(c);
  }
  return inst;
}

std::vector<std::uint8_t> positive(const std::vector<double>& capacity) {
  std::vector<std::uint8_t> d;
  for (double c : capacity) d.push_back(c > 0 ? 1 : 0);
  return d;
}

}  // namespace

TEST(Gini, UniformIsZero) {
  const std::vector<double> cap = {3, 3, 3, 3, 3};
  const auto r = regional_equity(per_capita(cap, {10, 10, 10, 10, 10}), positive(cap));
  EXPECT_EQ(r.gini, 0.0);
  EXPECT_EQ(r.regional_equity_pct, 100.0);
}

TEST(Gini, TwoMunicipalitiesSplit) {
  const std::vector<double> cap = {0, 4};
  const auto r = regional_equity(per_capita(cap, {50, 50}), positive(cap));
  EXPECT_NEAR(r.gini, 0.5, 1e-12);
  EXPECT_NEAR(r.regional_equity_pct, 50.0, 1e-12);
}

TEST(Gini, FourMunicipalitiesSingleHolder) {
  const std::vector<double> cap = {0, 0, 7, 0};
  const auto r = regional_equity(per_capita(cap, {20, 20, 20, 20}), positive(cap));
  EXPECT_NEAR(r.gini, 0.75, 1e-12);
  EXPECT_NEAR(r.regional_equity_pct, 25.0, 1e-12);
}

TEST(Gini, AllZeroIsFlagged) {
  const std::vector<double> cap = {0, 0};
  const auto r = regional_equity(per_capita(cap, {5, 5}), positive(cap));
  EXPECT_TRUE(r.all_zero);
  EXPECT_EQ(r.gini, 0.0);
}

TEST(Gini, ZeroPopulationExcludedAndCounted) {
  const std::vector<double> cap = {2, 2, 5};
  const auto r = regional_equity(per_capita(cap, {10, 10, 0}), positive(cap));
  EXPECT_EQ(r.excluded_zero_population, 1u);
  EXPECT_EQ(r.x.size(), 2u);
  EXPECT_EQ(r.gini, 0.0);
}

TEST(Gini, SortedFormEqualsDoubleSum) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(1 + trial % 60);
    for (double& v : x) v = trial % 5 == 0 ? std::floor(u(rng)) : u(rng);
    const double a = gini(x), b = testkit::gini_double_sum(x);
    EXPECT_NEAR(a, b, 1e-12);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Gini, ScaleInvariantAndTransferPrinciple) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(2 + trial % 20);
    for (double& v : x) v = u(rng);
    std::vector<double> scaled = x;
    for (double& v : scaled) v *= 3.5;
    EXPECT_NEAR(gini(x), gini(scaled), 1e-12);
    std::vector<double> lifted = x;
    *std::min_element(lifted.begin(), lifted.end()) += u(rng) * 0.1;
    EXPECT_LE(gini(lifted), gini(x) + 1e-12);
  }
}

TEST(Equity, ExistingStockToggle) {
  Instance inst = per_capita({2, 2}, {10, 10});
  inst.existing = {{1, 1, 50, 10, 6.0}};
  assign_existing_capacity(inst);
  const std::vector<std::uint8_t> both = {1, 1};
  EXPECT_GT(regional_equity(inst, both, false).regional_equity_pct,
            regional_equity(inst, both, true).regional_equity_pct);
  EXPECT_EQ(regional_equity(inst, both, false).gini, 0.0);
}

TEST(SouthQuota, Examples) {
  const std::vector<double> cap = {30, 70};
  const Instance inst = per_capita(cap, {1, 1});
  EXPECT_NEAR(south_quota(inst, {1, 1}).pct, 30.0, 1e-12);
  EXPECT_EQ(south_quota(inst, {1, 0}).pct, 100.0);
  const auto empty = south_quota(inst, {0, 0});
  EXPECT_EQ(empty.pct, 0.0);
  EXPECT_TRUE(empty.nothing_added);
}

TEST(SouthQuota, ComplementsNonSouthShare) {
  std::mt19937_64 rng(3);
  testkit::RandomInstanceOptions o;
  o.sites = 100;
  o.municipalities = 12;
  const Instance inst = testkit::random_instance(rng, o);
  std::vector<std::uint8_t> d(inst.candidates.size());
  for (auto& v : d) v = rng() % 2;
  const auto q = south_quota(inst, d);
  double non_south = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (!d[k]) continue;
    const auto& m = inst.municipalities[inst.municipality_index(inst.candidates[k].municipality_id)];
    if (m.region == Region::NonSouth) non_south += inst.candidates[k].capacity_mw;
  }
  EXPECT_NEAR(q.pct + 100.0 * non_south / q.added_mw, 100.0, 1e-9);
}

TEST(RegionalStats, DensityShareAndScenicness) {
  Instance inst;
  Municipality m;
  m.municipality_id = 1;
  m.population = 100;
  m.area_km2 = 500;
  m.state_id = 4;
  inst.municipalities.push_back(m);
  Municipality other = m;
  other.municipality_id = 2;
  other.state_id = 5;
  inst.municipalities.push_back(other);
  for (int k = 0; k < 10; ++k) {
    CandidateSite c;
    c.site_id = k + 1;
    c.municipality_id = 1;
    c.capacity_mw = 2;
    c.lcoe_ct_kwh = 5;
    c.scenicness = 1 + k % 3;
    inst.candidates.push_back(c);
  }
  const auto stats = regional_stats(inst, std::vector<std::uint8_t>(10, 1));
  ASSERT_EQ(stats.states.size(), 2u);
  EXPECT_DOUBLE_EQ(stats.states[0].turbines_per_1000_km2, 20.0);
  EXPECT_DOUBLE_EQ(stats.states[0].capacity_share_pct, 100.0);
  EXPECT_DOUBLE_EQ(*stats.states[0].mean_scenicness, 19.0 / 10.0);
  EXPECT_EQ(stats.states[1].turbines_per_1000_km2, 0.0);
  EXPECT_FALSE(stats.states[1].mean_scenicness.has_value());
}

TEST(RegionalStats, SharesSumToHundred) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    testkit::RandomInstanceOptions o;
    o.sites = 80;
    o.municipalities = 9;
    const Instance inst = testkit::random_instance(rng, o);
    std::vector<std::uint8_t> d(inst.candidates.size());
    for (auto& v : d) v = rng() % 3 == 0;
    d[0] = 1;
    double total = 0.0;
    for (const auto& s : regional_stats(inst, d).states) total += s.capacity_share_pct;
    EXPECT_NEAR(total, 100.0, 1e-9);
  }
}

TEST(Radar, GroupMinMax) {
  std::vector<RadarInput> in = {{"Base_a", "Base", {1, 5, 2, 10}},
                                {"Base_b", "Base", {3, 5, 4, 30}},
                                {"High_a", "High", {7, 1, 1, 1}}};
  const auto rows = radar_values(in);
  EXPECT_EQ(rows[0].values, (std::array<double, 4>{0, 0, 0, 0}));
  EXPECT_EQ(rows[1].values, (std::array<double, 4>{1, 0, 1, 1}));
  EXPECT_TRUE(rows[0].degenerate[1]);
  EXPECT_FALSE(rows[0].degenerate[0]);
  EXPECT_TRUE(rows[2].degenerate[0]);
}

TEST(Radar, PermutationInvariant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<RadarInput> in;
  for (int k = 0; k < 12; ++k) {
    in.push_back({"s" + std::to_string(k), k % 2 ? "Base" : "High", {u(rng), u(rng), u(rng), u(rng)}});
  }
  const auto rows = radar_values(in);
  auto shuffled = in;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (const auto& r : radar_values(shuffled)) {
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const RadarRow& x) { return x.name == r.name; });
    ASSERT_NE(it, rows.end());
    EXPECT_EQ(it->values, r.values);
    for (double v : r.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}
