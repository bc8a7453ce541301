#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>

#include <unistd.h>

#include "windplan/geoprep.hpp"

namespace windplan::testkit {

namespace {

double draw(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::vector<std::int64_t> shuffled_ids(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::int64_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::int64_t{1});
  for (auto& id : ids) id *= 7;
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

}  // namespace

Instance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& o) {
  Instance inst;
  const auto muni_ids = shuffled_ids(rng, o.municipalities);
  for (std::size_t j = 0; j < o.municipalities; ++j) {
    Municipality m;
    m.municipality_id = muni_ids[j];
    m.name = "m" + std::to_string(muni_ids[j]);
    m.population = std::round(draw(rng, 100.0, 10000.0));
    m.region = draw(rng, 0.0, 1.0) < 0.3 ? Region::South : Region::NonSouth;
    m.state_id = 1 + static_cast<std::int64_t>(j % 3);
    m.area_km2 = draw(rng, 5.0, 200.0);
    inst.municipalities.push_back(m);
  }
  const auto site_ids = shuffled_ids(rng, o.sites);
  std::uniform_int_distribution<std::size_t> pick_muni(0, o.municipalities - 1);
  for (std::size_t i = 0; i < o.sites; ++i) {
    CandidateSite c;
    c.site_id = site_ids[i];
    c.municipality_id = muni_ids[pick_muni(rng)];
    c.lat = draw(rng, 49.9, 50.1);
    c.lon = draw(rng, 9.9, 10.1);
    c.capacity_mw = draw(rng, o.capacity_min, o.capacity_max);
    c.lcoe_ct_kwh = draw(rng, 3.0, 10.0);
    c.scenicness = draw(rng, 1.0, 9.0);
    c.full_load_hours = draw(rng, 1500.0, 3000.0);
    if (o.network_lengths) c.network_length_km = draw(rng, 0.0, 20.0);
    inst.candidates.push_back(c);
  }
  for (std::size_t t = 0; t < o.existing; ++t) {
    ExistingTurbine e;
    e.turbine_id = static_cast<TurbineId>(t + 1);
    e.municipality_id = muni_ids[pick_muni(rng)];
    e.lat = draw(rng, 49.9, 50.1);
    e.lon = draw(rng, 9.9, 10.1);
    e.capacity_mw = draw(rng, 1.0, 3.0);
    inst.existing.push_back(e);
  }
  for (std::size_t t = 0; t < 5; ++t) {
    inst.transformers.push_back({static_cast<TransformerId>(t + 1), draw(rng, 49.9, 50.1), draw(rng, 9.9, 10.1),
                                 t % 2 == 0 ? 20 : 110});
  }
  assign_existing_capacity(inst);
  return inst;
}

Instance three_site_instance() {
  Instance inst;
  Municipality m;
  m.municipality_id = 1;
  m.name = "only";
  m.population = 1000;
  m.area_km2 = 10;
  inst.municipalities.push_back(m);
  const double caps[3] = {2.0, 2.0, 4.0};
  const double costs[3] = {1.0, 3.0, 5.0};
  for (int k = 0; k < 3; ++k) {
    CandidateSite c;
    c.site_id = k + 1;
    c.municipality_id = 1;
    c.lat = 50.0 + 0.01 * k;
    c.lon = 10.0;
    c.capacity_mw = caps[k];
    c.lcoe_ct_kwh = costs[k];
    c.scenicness = 1.0 + k;
    c.network_length_km = 1.0 + k;
    inst.candidates.push_back(c);
  }
  inst.transformers.push_back({1, 50.0, 10.0, 20});
  return inst;
}

bool independently_feasible(const Instance& instance, const std::vector<std::uint8_t>& decision,
                            const Constraints& constraints, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (decision.size() != instance.candidates.size()) return fail("decision size");
  double capacity = 0.0;
  double totals[3] = {0.0, 0.0, 0.0};
  std::map<MunicipalityId, double> added;
  for (std::size_t k = 0; k < decision.size(); ++k) {
    if (!decision[k]) continue;
    const CandidateSite& c = instance.candidates[k];
    capacity += c.capacity_mw;
    totals[0] += c.lcoe_ct_kwh;
    totals[1] += c.scenicness;
    totals[2] += c.network_length_km.value();
    added[c.municipality_id] += c.capacity_mw;
  }
  const auto tol = [](double ref) { return 1e-9 * std::max(1.0, std::abs(ref)); };
  if (capacity < constraints.cap_obj_mw - tol(constraints.cap_obj_mw)) return fail("capacity below target");
  for (int k = 0; k < 3; ++k) {
    if (constraints.max_total[k] && totals[k] > *constraints.max_total[k] + tol(*constraints.max_total[k])) {
      return fail("cap " + std::to_string(k) + " violated");
    }
  }
  for (const auto& [id, floor] : constraints.equity_floors) {
    if (added[id] < floor - tol(floor)) return fail("floor of municipality " + std::to_string(id) + " violated");
  }
  return true;
}

double gini_double_sum(std::span<const double> x) {
  const double m = static_cast<double>(x.size());
  double sum = 0.0, pairs = 0.0;
  for (double a : x) {
    sum += a;
    for (double b : x) pairs += std::abs(a - b);
  }
  if (sum == 0.0) return 0.0;
  const double mean = sum / m;
  return pairs / (2.0 * m * m * mean);
}

double reference_distance_km(double lat1, double lon1, double lat2, double lon2) {
  const double rad = M_PI / 180.0;
  const double dphi = (lat2 - lat1) * rad, dlambda = (lon2 - lon1) * rad;
  const double a = std::pow(std::sin(dphi / 2), 2) + std::cos(lat1 * rad) * std::cos(lat2 * rad) *
                                                          std::pow(std::sin(dlambda / 2), 2);
  return 2.0 * 6371.0088 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

NearestRef exhaustive_nearest(double lat, double lon, const std::vector<Transformer>& transformers) {
  NearestRef best{0, INFINITY};
  for (const Transformer& t : transformers) {
    const double d = geoprep::haversine_km({lat, lon}, {t.lat, t.lon});
    if (d < best.km || (d == best.km && t.transformer_id < best.id)) best = {t.transformer_id, d};
  }
  return best;
}

std::filesystem::path fresh_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("windplan_" + name + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace windplan::testkit
