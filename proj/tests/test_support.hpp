#pragma once

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "windplan/domain.hpp"
#include "windplan/solver.hpp"

namespace windplan::testkit {

struct RandomInstanceOptions {
  std::size_t sites = 10;
  std::size_t municipalities = 3;
  std::size_t existing = 2;
  double capacity_min = 1.0;
  double capacity_max = 5.0;
  bool network_lengths = true;
};

// Small random instance around (50N, 10E); ids are shuffled so tie-breaks
// and canonical ordering are exercised.
Instance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& options);

// Sites A, B, C with (capacity, cost) = (2, 1), (2, 3), (4, 5) as lcoe values;
// site ids 1, 2, 3 in one municipality.
Instance three_site_instance();

// Independent recomputation of every constraint from raw site data.
bool independently_feasible(const Instance& instance, const std::vector<std::uint8_t>& decision,
                            const Constraints& constraints, std::string* why = nullptr);

// Pairwise-sum Gini: sum_j sum_k |x_j - x_k| / (2 M^2 mean).
double gini_double_sum(std::span<const double> x);

// Great-circle distance via the atan2 form of the haversine with R = 6371.0088 km.
double reference_distance_km(double lat1, double lon1, double lat2, double lon2);

struct NearestRef {
  TransformerId id = 0;
  double km = 0.0;
};
// O(n) scan with geoprep::haversine_km; equal distances resolve to the lowest id.
NearestRef exhaustive_nearest(double lat, double lon, const std::vector<Transformer>& transformers);

// Fresh empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& name);

}  // namespace windplan::testkit
