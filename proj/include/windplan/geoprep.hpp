#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "windplan/domain.hpp"

namespace windplan::geoprep {

inline constexpr double kEarthMeanRadiusKm = 6371.0088;
inline constexpr double kDefaultBufferDiameterM = 1088.0;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Great-circle distance on a sphere of radius kEarthMeanRadiusKm.
double haversine_km(LatLon a, LatLon b);

// Uniform lat/lon grid over a fixed point set. Cells are sized so that a
// cell spans at least `cell_radius_km` everywhere up to the covered
// latitude, which makes a 3x3 neighborhood sufficient for radius queries
// with radius <= cell_radius_km.
class SpatialIndex {
 public:
  struct Point {
    LatLon pos;
    std::int64_t id = 0;
  };

  SpatialIndex(std::vector<Point> points, double cell_radius_km, double max_abs_lat_hint = 0.0);

  // Ids of all points with distance < radius_km (strict) or <= radius_km
  // when `inclusive`. Result sorted by id.
  std::vector<std::int64_t> within(LatLon query, double radius_km, bool inclusive = false) const;

  // True when at least one point lies strictly closer than radius_km.
  bool any_within(LatLon query, double radius_km) const;

  struct Nearest {
    std::int64_t id = 0;
    double distance_km = 0.0;
  };
  // Nearest point; equal distances resolve to the lowest id. Empty index -> nullopt.
  std::optional<Nearest> nearest(LatLon query) const;

  std::size_t size() const { return points_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  double cell_radius_km() const { return cell_radius_km_; }

 private:
  using CellKey = std::int64_t;

  int row_of(double lat) const;
  int col_of(double lon) const;
  CellKey key(int row, int col) const { return static_cast<CellKey>(row) * n_cols_ + col; }
  bool covers(LatLon q) const;
  template <typename Visit>
  void visit_neighborhood(LatLon q, Visit&& visit) const;
  // Lower bound on the distance from `q` to any point outside the rings 0..k.
  double outside_ring_bound_km(int k) const;

  std::vector<Point> points_;
  double cell_radius_km_;
  double max_abs_lat_;   // degrees, latitude band inside which the cell guarantee holds
  double lat_step_;      // degrees
  double lon_step_;      // degrees
  int n_rows_;
  int n_cols_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>> cells_;
};

struct ExclusionReport {
  std::size_t input_count = 0;
  std::size_t excluded_count = 0;
  double input_capacity_mw = 0.0;
  double excluded_capacity_mw = 0.0;
  // Fractions in [0, 1] of the input candidate count / capacity.
  double excluded_share_count = 0.0;
  double excluded_share_capacity = 0.0;
  std::vector<SiteId> excluded_site_ids;  // sorted
};

struct ExclusionResult {
  std::vector<CandidateSite> kept;  // input order preserved
  ExclusionReport report;
};

// Removes every candidate whose distance to an existing turbine is strictly
// less than buffer_diameter_m / 2.
ExclusionResult exclusion_filter(const std::vector<CandidateSite>& candidates,
                                 const std::vector<ExistingTurbine>& existing,
                                 double buffer_diameter_m = kDefaultBufferDiameterM);

struct Connection {
  TransformerId transformer_id = 0;
  double network_length_km = 0.0;
};

// Nearest transformer per candidate (aligned with `candidates`); ties go to
// the lowest transformer_id. Empty transformer set is a ValidationError.
std::vector<Connection> nearest_transformer(const std::vector<CandidateSite>& candidates,
                                            const std::vector<Transformer>& transformers);

// Applies nearest_transformer and stores the lengths in the candidates.
void assign_network_lengths(Instance& instance);

struct PrepResult {
  Instance instance;
  ExclusionReport exclusion;
};

// exclusion_filter followed by assign_network_lengths; the input is left untouched.
PrepResult prepare(const Instance& input, double buffer_diameter_m = kDefaultBufferDiameterM);

}  // namespace windplan::geoprep
