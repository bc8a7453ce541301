#include "windplan/geoprep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <unordered_set>

#include "windplan/errors.hpp"
#include "windplan/parallel.hpp"

namespace windplan {

std::size_t worker_count() {
  if (const char* env = std::getenv("PLAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace geoprep {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

double haversine_km(LatLon a, LatLon b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthMeanRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

SpatialIndex::SpatialIndex(std::vector<Point> points, double cell_radius_km, double max_abs_lat_hint)
    : points_(std::move(points)), cell_radius_km_(cell_radius_km) {
  if (!(cell_radius_km > 0.0)) throw ValidationError("SpatialIndex: cell radius must be > 0");
  double max_lat = std::abs(max_abs_lat_hint);
  for (const auto& p : points_) max_lat = std::max(max_lat, std::abs(p.pos.lat));
  max_abs_lat_ = std::min(max_lat, 90.0);

  // Meridian arcs bound latitude differences; longitude differences are
  // bounded through the haversine term scaled by cos(max latitude).
  const double safety = 1.0 + 1e-9;
  const double lat_min_step = std::min(180.0, cell_radius_km / kEarthMeanRadiusKm * kRadToDeg * safety);
  n_rows_ = std::max(1, static_cast<int>(std::floor(180.0 / lat_min_step)));
  lat_step_ = 180.0 / n_rows_;

  const double cos_max = std::cos(max_abs_lat_ * kDegToRad);
  const double arg = cos_max > 0.0 ? std::sin(cell_radius_km / (2.0 * kEarthMeanRadiusKm)) / cos_max : 2.0;
  if (arg >= 1.0) {
    n_cols_ = 1;
  } else {
    const double lon_min_step = 2.0 * std::asin(arg) * kRadToDeg * safety;
    n_cols_ = std::max(1, static_cast<int>(std::floor(360.0 / lon_min_step)));
  }
  lon_step_ = 360.0 / n_cols_;

  for (std::uint32_t k = 0; k < points_.size(); ++k) {
    cells_[key(row_of(points_[k].pos.lat), col_of(points_[k].pos.lon))].push_back(k);
  }
}

int SpatialIndex::row_of(double lat) const {
  const int r = static_cast<int>(std::floor((lat + 90.0) / lat_step_));
  return std::clamp(r, 0, n_rows_ - 1);
}

int SpatialIndex::col_of(double lon) const {
  int c = static_cast<int>(std::floor((lon + 180.0) / lon_step_)) % n_cols_;
  if (c < 0) c += n_cols_;
  return c;
}

bool SpatialIndex::covers(LatLon q) const { return std::abs(q.lat) <= max_abs_lat_; }

template <typename Visit>
void SpatialIndex::visit_neighborhood(LatLon q, Visit&& visit) const {
  const int r0 = row_of(q.lat);
  const int c0 = col_of(q.lon);
  CellKey seen[9];
  int n_seen = 0;
  for (int dr = -1; dr <= 1; ++dr) {
    const int r = r0 + dr;
    if (r < 0 || r >= n_rows_) continue;
    for (int dc = -1; dc <= 1; ++dc) {
      const int c = ((c0 + dc) % n_cols_ + n_cols_) % n_cols_;
      const CellKey k = key(r, c);
      if (std::find(seen, seen + n_seen, k) != seen + n_seen) continue;
      seen[n_seen++] = k;
      auto it = cells_.find(k);
      if (it == cells_.end()) continue;
      for (std::uint32_t idx : it->second) visit(points_[idx]);
    }
  }
}

std::vector<std::int64_t> SpatialIndex::within(LatLon query, double radius_km, bool inclusive) const {
  std::vector<std::int64_t> out;
  auto test = [&](const Point& p) {
    const double d = haversine_km(query, p.pos);
    if (d < radius_km || (inclusive && d == radius_km)) out.push_back(p.id);
  };
  if (radius_km <= cell_radius_km_ && covers(query)) {
    visit_neighborhood(query, test);
  } else {
    for (const auto& p : points_) test(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool SpatialIndex::any_within(LatLon query, double radius_km) const {
  bool found = false;
  auto test = [&](const Point& p) {
    if (!found && haversine_km(query, p.pos) < radius_km) found = true;
  };
  if (radius_km <= cell_radius_km_ && covers(query)) {
    visit_neighborhood(query, test);
  } else {
    for (const auto& p : points_) test(p);
  }
  return found;
}

double SpatialIndex::outside_ring_bound_km(int k) const {
  const double row_bound = kEarthMeanRadiusKm * (k * lat_step_ * kDegToRad);
  double col_bound = std::numeric_limits<double>::infinity();
  if (2 * k + 1 < n_cols_) {
    const double half = std::min(k * lon_step_, 180.0) * kDegToRad / 2.0;
    const double arg = std::cos(max_abs_lat_ * kDegToRad) * std::sin(half);
    col_bound = 2.0 * kEarthMeanRadiusKm * std::asin(std::clamp(arg, 0.0, 1.0));
  }
  return std::min(row_bound, col_bound);
}

std::optional<SpatialIndex::Nearest> SpatialIndex::nearest(LatLon query) const {
  if (points_.empty()) return std::nullopt;
  Nearest best{0, std::numeric_limits<double>::infinity()};
  auto consider = [&](const Point& p) {
    const double d = haversine_km(query, p.pos);
    if (d < best.distance_km || (d == best.distance_km && p.id < best.id)) best = {p.id, d};
  };
  if (!covers(query)) {
    for (const auto& p : points_) consider(p);
    return best;
  }

  const int r0 = row_of(query.lat);
  const int c0 = col_of(query.lon);
  std::unordered_set<CellKey> visited;
  for (int k = 0;; ++k) {
    const bool rows_saturated = r0 - k <= 0 && r0 + k >= n_rows_ - 1;
    const bool cols_saturated = 2 * k + 1 >= n_cols_;
    for (int dr = -k; dr <= k; ++dr) {
      const int r = r0 + dr;
      if (r < 0 || r >= n_rows_) continue;
      auto visit_col = [&](int dc) {
        const int c = ((c0 + dc) % n_cols_ + n_cols_) % n_cols_;
        const CellKey ck = key(r, c);
        if (!visited.insert(ck).second) return;
        auto it = cells_.find(ck);
        if (it == cells_.end()) return;
        for (std::uint32_t idx : it->second) consider(points_[idx]);
      };
      if (std::abs(dr) == k) {
        const int span = std::min(k, n_cols_);
        for (int dc = -span; dc <= span; ++dc) visit_col(dc);
      } else if (k < n_cols_) {
        visit_col(-k);
        visit_col(k);
      }
    }
    if (rows_saturated && cols_saturated) break;
    if (best.distance_km < outside_ring_bound_km(k)) break;
  }
  return best;
}

ExclusionResult exclusion_filter(const std::vector<CandidateSite>& candidates,
                                 const std::vector<ExistingTurbine>& existing, double buffer_diameter_m) {
  if (!(buffer_diameter_m > 0.0)) throw ValidationError("buffer diameter must be > 0");
  const double radius_km = buffer_diameter_m / 2.0 / 1000.0;

  ExclusionResult result;
  result.report.input_count = candidates.size();
  std::vector<char> excluded(candidates.size(), 0);
  if (!existing.empty()) {
    std::vector<SpatialIndex::Point> pts;
    pts.reserve(existing.size());
    double max_lat = 0.0;
    for (const auto& t : existing) pts.push_back({{t.lat, t.lon}, t.turbine_id});
    for (const auto& c : candidates) max_lat = std::max(max_lat, std::abs(c.lat));
    const SpatialIndex index(std::move(pts), radius_km, max_lat);
    parallel_for(candidates.size(), worker_count(), [&](std::size_t k) {
      excluded[k] = index.any_within({candidates[k].lat, candidates[k].lon}, radius_km) ? 1 : 0;
    });
  }

  std::vector<const CandidateSite*> by_id;
  by_id.reserve(candidates.size());
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (excluded[k]) {
      by_id.push_back(&candidates[k]);
    } else {
      result.kept.push_back(candidates[k]);
    }
  }
  // Sum in id order so the report does not depend on input order.
  std::sort(by_id.begin(), by_id.end(), [](const CandidateSite* a, const CandidateSite* b) { return a->site_id < b->site_id; });
  for (const CandidateSite* c : by_id) {
    result.report.excluded_capacity_mw += c->capacity_mw;
    result.report.excluded_site_ids.push_back(c->site_id);
  }
  std::vector<const CandidateSite*> all;
  all.reserve(candidates.size());
  for (const auto& c : candidates) all.push_back(&c);
  std::sort(all.begin(), all.end(), [](const CandidateSite* a, const CandidateSite* b) { return a->site_id < b->site_id; });
  for (const CandidateSite* c : all) result.report.input_capacity_mw += c->capacity_mw;

  result.report.excluded_count = by_id.size();
  if (result.report.input_count > 0) {
    result.report.excluded_share_count =
        static_cast<double>(result.report.excluded_count) / static_cast<double>(result.report.input_count);
  }
  if (result.report.input_capacity_mw > 0.0) {
    result.report.excluded_share_capacity = result.report.excluded_capacity_mw / result.report.input_capacity_mw;
  }
  return result;
}

std::vector<Connection> nearest_transformer(const std::vector<CandidateSite>& candidates,
                                            const std::vector<Transformer>& transformers) {
  if (transformers.empty()) throw ValidationError("nearest_transformer: no transformers available");

  double lat_lo = 90.0, lat_hi = -90.0, lon_lo = 180.0, lon_hi = -180.0, max_lat = 0.0;
  std::vector<SpatialIndex::Point> pts;
  pts.reserve(transformers.size());
  for (const auto& t : transformers) {
    pts.push_back({{t.lat, t.lon}, t.transformer_id});
    lat_lo = std::min(lat_lo, t.lat);
    lat_hi = std::max(lat_hi, t.lat);
    lon_lo = std::min(lon_lo, t.lon);
    lon_hi = std::max(lon_hi, t.lon);
  }
  for (const auto& c : candidates) max_lat = std::max(max_lat, std::abs(c.lat));

  // Cell size ~ mean transformer spacing, so a query touches a handful of cells.
  const double mid = (lat_lo + lat_hi) / 2.0 * kDegToRad;
  const double height_km = std::max(1.0, (lat_hi - lat_lo) * kDegToRad * kEarthMeanRadiusKm);
  const double width_km = std::max(1.0, (lon_hi - lon_lo) * kDegToRad * kEarthMeanRadiusKm * std::cos(mid));
  const double spacing = std::sqrt(height_km * width_km / static_cast<double>(transformers.size()));
  const SpatialIndex index(std::move(pts), std::max(0.5, spacing), max_lat);

  std::vector<Connection> out(candidates.size());
  parallel_for(candidates.size(), worker_count(), [&](std::size_t k) {
    const auto hit = index.nearest({candidates[k].lat, candidates[k].lon});
    out[k] = {hit->id, hit->distance_km};
  });
  return out;
}

void assign_network_lengths(Instance& instance) {
  const auto conn = nearest_transformer(instance.candidates, instance.transformers);
  for (std::size_t k = 0; k < conn.size(); ++k) instance.candidates[k].network_length_km = conn[k].network_length_km;
}

PrepResult prepare(const Instance& input, double buffer_diameter_m) {
  PrepResult result;
  result.instance = input;
  ExclusionResult ex = exclusion_filter(input.candidates, input.existing, buffer_diameter_m);
  result.instance.candidates = std::move(ex.kept);
  result.exclusion = std::move(ex.report);
  if (result.instance.candidates.empty()) throw ValidationError("prep: every candidate was excluded");
  assign_network_lengths(result.instance);
  return result;
}

}  // namespace geoprep
}  // namespace windplan
