#include "windplan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include "windplan/errors.hpp"
#include "windplan/geoprep.hpp"

namespace windplan {

namespace {

using nlohmann::json;

constexpr double kScenicSlope = 0.8;
constexpr std::size_t kFieldFeatures = 48;
constexpr std::size_t kAreaLatticeSide = 300;

// Uniform and normal draws built directly on the engine's output, so the
// stream is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double scenic_offset() { return std::sqrt(1.0 + kScenicSlope * kScenicSlope) * normal_quantile(3.5 / 8.0); }

// Scenicness in (1, 9) with mean 4.5 for a standard normal score.
double scenic_from_score(double z) { return 1.0 + 8.0 * normal_cdf(scenic_offset() + kScenicSlope * z); }

// Pearson correlation of scenicness(z) and LCOE(u) with corr(z, u) = r.
// E[exp(sigma*u) | z] is closed-form, leaving a 1-D integral over z.
double pearson_for(const SynthSpec& spec, double r) {
  const double m = std::log(spec.lcoe_median_excess), s = spec.lcoe_sigma;
  const double step = 0.002, lo = -12.0;
  const int n = static_cast<int>(24.0 / step);
  double e_g = 0.0, e_g2 = 0.0, e_gh = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double z = lo + step * k;
    const double w = (k == 0 || k == n ? 0.5 : 1.0) * step * std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    const double g = scenic_from_score(z);
    e_g += w * g;
    e_g2 += w * g * g;
    e_gh += w * g * std::exp(m + s * r * z);
  }
  e_gh *= std::exp(0.5 * s * s * (1.0 - r * r));
  const double e_h = std::exp(m + 0.5 * s * s);
  const double var_h = std::exp(2.0 * m + s * s) * std::expm1(s * s);
  const double var_g = e_g2 - e_g * e_g;
  return (e_gh - e_g * e_h) / std::sqrt(var_g * var_h);
}

struct Field {
  std::vector<double> wx, wy, phase;
};

void set_from_json(const json& j, const char* key, double& target) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw ValidationError(std::string("synth spec: '") + key + "' must be a number");
  target = j.at(key).get<double>();
}

void set_from_json(const json& j, const char* key, std::size_t& target) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() < 0) {
    throw ValidationError(std::string("synth spec: '") + key + "' must be a nonnegative integer");
  }
  target = j.at(key).get<std::size_t>();
}

}  // namespace

void SynthSpec::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("synth spec: " + what);
  };
  need(n_sites >= 1, "n_sites must be >= 1");
  need(n_municipalities >= 1, "n_municipalities must be >= 1");
  need(n_states >= 1, "n_states must be >= 1");
  need(n_transformers >= 1, "n_transformers must be >= 1");
  need(n_existing >= 1, "n_existing must be >= 1");
  need(capacity_min_mw > 0.0 && capacity_max_mw >= capacity_min_mw, "capacity range must satisfy 0 < min <= max");
  need(existing_capacity_min_mw > 0.0 && existing_capacity_max_mw >= existing_capacity_min_mw,
       "existing capacity range must satisfy 0 < min <= max");
  need(lcoe_scenicness_correlation >= -1.0 && lcoe_scenicness_correlation <= 1.0,
       "lcoe_scenicness_correlation must lie in [-1, 1]");
  need(scenicness_smoothness_km > 0.0, "scenicness_smoothness_km must be > 0");
  need(lat_min >= -90.0 && lat_max <= 90.0 && lat_min < lat_max, "latitude box invalid");
  need(lon_min >= -180.0 && lon_max <= 180.0 && lon_min < lon_max, "longitude box invalid");
  need(lcoe_shift >= 0.0 && lcoe_median_excess > 0.0 && lcoe_sigma > 0.0, "LCOE parameters invalid");
  need(population_median > 0.0 && population_sigma >= 0.0, "population parameters invalid");
  need(south_state_fraction >= 0.0 && south_state_fraction <= 1.0, "south_state_fraction must lie in [0, 1]");
  need(existing_low_lcoe_fraction > 0.0 && existing_low_lcoe_fraction <= 1.0,
       "existing_low_lcoe_fraction must lie in (0, 1]");
  need(existing_jitter_m >= 0.0, "existing_jitter_m must be >= 0");
  need(transformer_20kv_share >= 0.0 && transformer_20kv_share <= 1.0, "transformer_20kv_share must lie in [0, 1]");
}

SynthSpec germany_like_spec() {
  SynthSpec s;
  s.seed = 20170101;
  s.n_sites = 160000;
  s.n_municipalities = 11000;
  s.n_states = 16;
  s.n_transformers = 4000;
  s.n_existing = 275;
  return s;
}

SynthSpec parse_synth_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("synth spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("synth spec must be a JSON object");
  SynthSpec s;
  const json defaults = json::parse(synth_spec_to_json(s));
  for (const auto& item : j.items()) {
    if (!defaults.contains(item.key())) throw ValidationError("synth spec: unknown field '" + item.key() + "'");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ValidationError("synth spec: 'seed' must be a nonnegative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  set_from_json(j, "n_sites", s.n_sites);
  set_from_json(j, "n_municipalities", s.n_municipalities);
  set_from_json(j, "n_states", s.n_states);
  set_from_json(j, "n_transformers", s.n_transformers);
  set_from_json(j, "n_existing", s.n_existing);
  set_from_json(j, "capacity_min_mw", s.capacity_min_mw);
  set_from_json(j, "capacity_max_mw", s.capacity_max_mw);
  set_from_json(j, "existing_capacity_min_mw", s.existing_capacity_min_mw);
  set_from_json(j, "existing_capacity_max_mw", s.existing_capacity_max_mw);
  set_from_json(j, "lcoe_scenicness_correlation", s.lcoe_scenicness_correlation);
  set_from_json(j, "scenicness_smoothness_km", s.scenicness_smoothness_km);
  set_from_json(j, "lat_min", s.lat_min);
  set_from_json(j, "lat_max", s.lat_max);
  set_from_json(j, "lon_min", s.lon_min);
  set_from_json(j, "lon_max", s.lon_max);
  set_from_json(j, "lcoe_shift", s.lcoe_shift);
  set_from_json(j, "lcoe_median_excess", s.lcoe_median_excess);
  set_from_json(j, "lcoe_sigma", s.lcoe_sigma);
  set_from_json(j, "population_median", s.population_median);
  set_from_json(j, "population_sigma", s.population_sigma);
  set_from_json(j, "south_state_fraction", s.south_state_fraction);
  set_from_json(j, "existing_low_lcoe_fraction", s.existing_low_lcoe_fraction);
  set_from_json(j, "existing_jitter_m", s.existing_jitter_m);
  set_from_json(j, "transformer_20kv_share", s.transformer_20kv_share);
  s.validate();
  return s;
}

std::string synth_spec_to_json(const SynthSpec& s) {
  json j = {{"seed", s.seed},
            {"n_sites", s.n_sites},
            {"n_municipalities", s.n_municipalities},
            {"n_states", s.n_states},
            {"n_transformers", s.n_transformers},
            {"n_existing", s.n_existing},
            {"capacity_min_mw", s.capacity_min_mw},
            {"capacity_max_mw", s.capacity_max_mw},
            {"existing_capacity_min_mw", s.existing_capacity_min_mw},
            {"existing_capacity_max_mw", s.existing_capacity_max_mw},
            {"lcoe_scenicness_correlation", s.lcoe_scenicness_correlation},
            {"scenicness_smoothness_km", s.scenicness_smoothness_km},
            {"lat_min", s.lat_min},
            {"lat_max", s.lat_max},
            {"lon_min", s.lon_min},
            {"lon_max", s.lon_max},
            {"lcoe_shift", s.lcoe_shift},
            {"lcoe_median_excess", s.lcoe_median_excess},
            {"lcoe_sigma", s.lcoe_sigma},
            {"population_median", s.population_median},
            {"population_sigma", s.population_sigma},
            {"south_state_fraction", s.south_state_fraction},
            {"existing_low_lcoe_fraction", s.existing_low_lcoe_fraction},
            {"existing_jitter_m", s.existing_jitter_m},
            {"transformer_20kv_share", s.transformer_20kv_share}};
  return j.dump(2);
}

double calibrate_copula_correlation(const SynthSpec& spec) {
  const double target = spec.lcoe_scenicness_correlation;
  if (target == 0.0) return 0.0;
  const double lo_corr = pearson_for(spec, -1.0), hi_corr = pearson_for(spec, 1.0);
  if (target < lo_corr || target > hi_corr) {
    throw ValidationError("synth spec: correlation " + std::to_string(target) +
                          " is unreachable with these marginals (reachable range [" + std::to_string(lo_corr) +
                          ", " + std::to_string(hi_corr) + "])");
  }
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pearson_for(spec, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Instance generate(const SynthSpec& spec) {
  spec.validate();
  const double copula = calibrate_copula_correlation(spec);
  Rng rng(spec.seed);
  Instance inst;

  const double lat_mid = 0.5 * (spec.lat_min + spec.lat_max);
  const double km_per_lon = 111.32 * std::cos(lat_mid * std::numbers::pi / 180.0);
  const double km_per_lat = 110.57;
  const double box_area_km2 = (spec.lat_max - spec.lat_min) * km_per_lat * (spec.lon_max - spec.lon_min) * km_per_lon;
  const double max_abs_lat = std::max(std::abs(spec.lat_min), std::abs(spec.lat_max));

  // States and municipalities: random centers, nearest-center partition.
  std::vector<geoprep::LatLon> state_centers(spec.n_states);
  for (auto& c : state_centers) c = {rng.uniform(spec.lat_min, spec.lat_max), rng.uniform(spec.lon_min, spec.lon_max)};
  std::vector<std::size_t> by_lat(spec.n_states);
  std::iota(by_lat.begin(), by_lat.end(), std::size_t{0});
  std::sort(by_lat.begin(), by_lat.end(), [&](std::size_t a, std::size_t b) {
    return state_centers[a].lat != state_centers[b].lat ? state_centers[a].lat < state_centers[b].lat : a < b;
  });
  const auto n_south = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(spec.south_state_fraction * static_cast<double>(spec.n_states) - 1e-9)));
  std::vector<char> state_south(spec.n_states, 0);
  for (std::size_t q = 0; q < std::min(n_south, spec.n_states); ++q) state_south[by_lat[q]] = 1;

  std::vector<geoprep::SpatialIndex::Point> muni_points(spec.n_municipalities);
  inst.municipalities.resize(spec.n_municipalities);
  for (std::size_t j = 0; j < spec.n_municipalities; ++j) {
    const geoprep::LatLon c{rng.uniform(spec.lat_min, spec.lat_max), rng.uniform(spec.lon_min, spec.lon_max)};
    muni_points[j] = {c, static_cast<std::int64_t>(j)};
    std::size_t state = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < spec.n_states; ++s) {
      const double d = geoprep::haversine_km(c, state_centers[s]);
      if (d < best) {
        best = d;
        state = s;
      }
    }
    Municipality& m = inst.municipalities[j];
    m.municipality_id = static_cast<MunicipalityId>(j + 1);
    m.name = "Municipality " + std::to_string(j + 1);
    m.state_id = static_cast<std::int64_t>(state + 1);
    m.region = state_south[state] ? Region::South : Region::NonSouth;
    m.population = std::max(1.0, std::round(spec.population_median * std::exp(spec.population_sigma * rng.normal())));
  }
  const double muni_spacing = std::sqrt(box_area_km2 / static_cast<double>(spec.n_municipalities));
  const geoprep::SpatialIndex muni_index(muni_points, std::max(muni_spacing, 1e-3), max_abs_lat);

  // Areas from a latitude-weighted lattice over the box.
  {
    const double dlat = (spec.lat_max - spec.lat_min) / kAreaLatticeSide;
    const double dlon = (spec.lon_max - spec.lon_min) / kAreaLatticeSide;
    const double rad = std::numbers::pi / 180.0;
    const double r2 = geoprep::kEarthMeanRadiusKm * geoprep::kEarthMeanRadiusKm;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < kAreaLatticeSide; ++a) {
      const double lat = spec.lat_min + (static_cast<double>(a) + 0.5) * dlat;
      const double cell = r2 * (dlat * rad) * (dlon * rad) * std::cos(lat * rad);
      smallest = std::min(smallest, cell);
      for (std::size_t b = 0; b < kAreaLatticeSide; ++b) {
        const double lon = spec.lon_min + (static_cast<double>(b) + 0.5) * dlon;
        inst.municipalities[muni_index.nearest({lat, lon})->id].area_km2 += cell;
      }
    }
    for (auto& m : inst.municipalities) {
      if (!(m.area_km2 > 0.0)) m.area_km2 = smallest;
    }
  }

  // Candidate coordinates and the smooth scenicness field.
  inst.candidates.resize(spec.n_sites);
  Field field;
  for (std::size_t k = 0; k < kFieldFeatures; ++k) {
    field.wx.push_back(rng.normal() / spec.scenicness_smoothness_km);
    field.wy.push_back(rng.normal() / spec.scenicness_smoothness_km);
    field.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  std::vector<double> raw_field(spec.n_sites);
  for (std::size_t i = 0; i < spec.n_sites; ++i) {
    CandidateSite& c = inst.candidates[i];
    c.site_id = static_cast<SiteId>(i + 1);
    c.lat = rng.uniform(spec.lat_min, spec.lat_max);
    c.lon = rng.uniform(spec.lon_min, spec.lon_max);
    c.capacity_mw = spec.capacity_min_mw == spec.capacity_max_mw
                        ? spec.capacity_min_mw
                        : rng.uniform(spec.capacity_min_mw, spec.capacity_max_mw);
    c.municipality_id = inst.municipalities[muni_index.nearest({c.lat, c.lon})->id].municipality_id;
    const double x = (c.lon - spec.lon_min) * km_per_lon, y = (c.lat - spec.lat_min) * km_per_lat;
    double f = 0.0;
    for (std::size_t k = 0; k < kFieldFeatures; ++k) f += std::cos(field.wx[k] * x + field.wy[k] * y + field.phase[k]);
    raw_field[i] = f;
  }

  // Rank-based normal scores give exactly normal marginals before the copula.
  std::vector<std::size_t> rank_order(spec.n_sites);
  std::iota(rank_order.begin(), rank_order.end(), std::size_t{0});
  std::sort(rank_order.begin(), rank_order.end(), [&](std::size_t a, std::size_t b) {
    return raw_field[a] != raw_field[b] ? raw_field[a] < raw_field[b] : a < b;
  });
  std::vector<double> score(spec.n_sites);
  const double n = static_cast<double>(spec.n_sites);
  for (std::size_t r = 0; r < spec.n_sites; ++r) {
    score[rank_order[r]] = normal_quantile((static_cast<double>(r) + 0.5) / n);
  }
  const double log_median = std::log(spec.lcoe_median_excess);
  const double residual_weight = std::sqrt(std::max(0.0, 1.0 - copula * copula));
  for (std::size_t i = 0; i < spec.n_sites; ++i) {
    CandidateSite& c = inst.candidates[i];
    c.scenicness = std::clamp(scenic_from_score(score[i]), 1.0, 9.0);
    const double u = copula * score[i] + residual_weight * rng.normal();
    c.lcoe_ct_kwh = spec.lcoe_shift + std::exp(log_median + spec.lcoe_sigma * u);
    c.full_load_hours = std::round(10500.0 / c.lcoe_ct_kwh);
  }

  // Existing turbines next to low-LCOE candidates.
  std::vector<std::size_t> cheap(spec.n_sites);
  std::iota(cheap.begin(), cheap.end(), std::size_t{0});
  std::sort(cheap.begin(), cheap.end(), [&](std::size_t a, std::size_t b) {
    const double la = inst.candidates[a].lcoe_ct_kwh, lb = inst.candidates[b].lcoe_ct_kwh;
    return la != lb ? la < lb : a < b;
  });
  cheap.resize(std::max<std::size_t>(1, static_cast<std::size_t>(spec.existing_low_lcoe_fraction * n)));
  const bool distinct = spec.n_existing <= cheap.size();
  for (std::size_t t = 0; t < spec.n_existing; ++t) {
    std::size_t slot;
    if (distinct) {
      std::swap(cheap[t], cheap[t + rng.index(cheap.size() - t)]);
      slot = cheap[t];
    } else {
      slot = cheap[rng.index(cheap.size())];
    }
    const CandidateSite& anchor = inst.candidates[slot];
    const double dist_km = spec.existing_jitter_m / 1000.0 * std::sqrt(rng.uniform());
    const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
    ExistingTurbine e;
    e.turbine_id = static_cast<TurbineId>(t + 1);
    e.municipality_id = anchor.municipality_id;
    e.lat = std::clamp(anchor.lat + dist_km * std::cos(bearing) / km_per_lat, -90.0, 90.0);
    e.lon = std::clamp(anchor.lon + dist_km * std::sin(bearing) /
                                        (111.32 * std::cos(anchor.lat * std::numbers::pi / 180.0)),
                       -180.0, 180.0);
    e.capacity_mw = spec.existing_capacity_min_mw == spec.existing_capacity_max_mw
                        ? spec.existing_capacity_min_mw
                        : rng.uniform(spec.existing_capacity_min_mw, spec.existing_capacity_max_mw);
    inst.existing.push_back(e);
  }

  for (std::size_t t = 0; t < spec.n_transformers; ++t) {
    Transformer tr;
    tr.transformer_id = static_cast<TransformerId>(t + 1);
    tr.lat = rng.uniform(spec.lat_min, spec.lat_max);
    tr.lon = rng.uniform(spec.lon_min, spec.lon_max);
    tr.voltage_kv = rng.uniform() < spec.transformer_20kv_share ? 20 : 110;
    inst.transformers.push_back(tr);
  }

  assign_existing_capacity(inst);
  inst.metadata = "synthetic instance, seed " + std::to_string(spec.seed);
  return inst;
}

}  // namespace windplan
