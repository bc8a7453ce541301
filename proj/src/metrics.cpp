#include "windplan/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "windplan/errors.hpp"

namespace windplan {

namespace {

void require_aligned(const Instance& instance, const std::vector<std::uint8_t>& decision) {
  if (decision.size() != instance.candidates.size()) {
    throw ValidationError("decision vector size does not match candidate count");
  }
}

// Candidate positions in ascending site_id order, so sums do not depend on file order.
std::vector<std::size_t> id_order(const Instance& instance) {
  std::vector<std::size_t> order(instance.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance.candidates[a].site_id < instance.candidates[b].site_id;
  });
  return order;
}

}  // namespace

double gini(std::span<const double> x) {
  if (x.empty()) return 0.0;
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double m = static_cast<double>(n);
  double total = 0.0, weighted = 0.0;
  for (double v : sorted) total += v;
  // Rank weights are antisymmetric, so pair i with n-1-i; equal values cancel exactly.
  for (std::size_t i = 0; i < n / 2; ++i) {
    weighted += (m - 1.0 - 2.0 * static_cast<double>(i)) * (sorted[n - 1 - i] - sorted[i]);
  }
  if (!(total > 0.0)) return 0.0;
  return std::clamp(weighted / (m * total), 0.0, 1.0);
}

EquityReport regional_equity(const Instance& instance, const std::vector<std::uint8_t>& decision,
                             bool include_existing) {
  require_aligned(instance, decision);
  const auto muni = instance.candidate_municipality_indices();
  std::vector<double> added(instance.municipalities.size(), 0.0);
  for (std::size_t k : id_order(instance)) {
    if (decision[k]) added[muni[k]] += instance.candidates[k].capacity_mw;
  }
  EquityReport report;
  for (std::size_t j = 0; j < instance.municipalities.size(); ++j) {
    const Municipality& m = instance.municipalities[j];
    if (!(m.population > 0.0)) {
      ++report.excluded_zero_population;
      continue;
    }
    const double installed = (include_existing ? m.existing_capacity_mw : 0.0) + added[j];
    report.municipality_ids.push_back(m.municipality_id);
    report.x.push_back(installed / m.population);
  }
  report.all_zero = std::all_of(report.x.begin(), report.x.end(), [](double v) { return v == 0.0; });
  report.gini = report.all_zero ? 0.0 : gini(report.x);
  report.regional_equity_pct = (1.0 - report.gini) * 100.0;
  return report;
}

SouthQuota south_quota(const Instance& instance, const std::vector<std::uint8_t>& decision) {
  require_aligned(instance, decision);
  const auto muni = instance.candidate_municipality_indices();
  SouthQuota q;
  for (std::size_t k : id_order(instance)) {
    if (!decision[k]) continue;
    const double mw = instance.candidates[k].capacity_mw;
    q.added_mw += mw;
    if (instance.municipalities[muni[k]].region == Region::South) q.south_mw += mw;
  }
  q.nothing_added = !(q.added_mw > 0.0);
  q.pct = q.nothing_added ? 0.0 : 100.0 * q.south_mw / q.added_mw;
  return q;
}

RegionalStats regional_stats(const Instance& instance, const std::vector<std::uint8_t>& decision) {
  require_aligned(instance, decision);
  const auto muni = instance.candidate_municipality_indices();
  struct Acc {
    double area = 0.0;
    std::size_t turbines = 0;
    double capacity = 0.0;
    double scenic = 0.0;
  };
  std::map<std::int64_t, Acc> acc;
  for (const Municipality& m : instance.municipalities) acc[m.state_id].area += m.area_km2;
  double national = 0.0;
  for (std::size_t k : id_order(instance)) {
    if (!decision[k]) continue;
    const CandidateSite& c = instance.candidates[k];
    Acc& a = acc[instance.municipalities[muni[k]].state_id];
    a.turbines += 1;
    a.capacity += c.capacity_mw;
    a.scenic += c.scenicness;
    national += c.capacity_mw;
  }
  RegionalStats stats;
  for (const auto& [state, a] : acc) {
    StateStats s;
    s.state_id = state;
    s.area_km2 = a.area;
    s.turbines = a.turbines;
    s.capacity_mw = a.capacity;
    s.turbines_per_1000_km2 = a.area > 0.0 ? static_cast<double>(a.turbines) / a.area * 1000.0 : 0.0;
    s.capacity_share_pct = national > 0.0 ? 100.0 * a.capacity / national : 0.0;
    if (a.turbines > 0) s.mean_scenicness = a.scenic / static_cast<double>(a.turbines);
    stats.states.push_back(s);
  }
  stats.south = south_quota(instance, decision);
  return stats;
}

std::vector<RadarRow> radar_values(const std::vector<RadarInput>& inputs) {
  std::map<std::string, std::pair<std::array<double, kRadarAxes>, std::array<double, kRadarAxes>>> range;
  for (const RadarInput& in : inputs) {
    auto [it, fresh] = range.try_emplace(in.group, in.values, in.values);
    if (fresh) continue;
    for (std::size_t a = 0; a < kRadarAxes; ++a) {
      it->second.first[a] = std::min(it->second.first[a], in.values[a]);
      it->second.second[a] = std::max(it->second.second[a], in.values[a]);
    }
  }
  std::vector<RadarRow> rows;
  rows.reserve(inputs.size());
  for (const RadarInput& in : inputs) {
    RadarRow row;
    row.name = in.name;
    row.group = in.group;
    const auto& [lo, hi] = range.at(in.group);
    for (std::size_t a = 0; a < kRadarAxes; ++a) {
      if (hi[a] == lo[a]) {
        row.degenerate[a] = true;
        row.values[a] = 0.0;
      } else {
        row.values[a] = (in.values[a] - lo[a]) / (hi[a] - lo[a]);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace windplan
