#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "windplan/domain.hpp"

namespace windplan {

enum class Criterion { Lcoe = 0, Scenicness = 1, NetworkLength = 2 };

inline constexpr std::array<Criterion, 3> kAllCriteria = {Criterion::Lcoe, Criterion::Scenicness,
                                                          Criterion::NetworkLength};

std::string to_string(Criterion c);
// Accepts "lcoe", "scenicness", "network_length" (and "network"/"length").
Criterion parse_criterion(const std::string& text);

// Raw per-site value of a criterion. Network length must be present.
double criterion_value(const CandidateSite& site, Criterion c);

struct Weights {
  double lcoe = 0.0;
  double scenicness = 0.0;
  double network_length = 0.0;

  double of(Criterion c) const;
  // Exactly one weight equals 1 and the others 0.
  bool is_single_criterion() const;
  // Throws ValidationError unless every weight lies in [0, 1] and one is > 0.
  void validate() const;
};

struct MinMaxScaled {
  std::vector<double> values;
  double x_min = 0.0;
  double x_max = 0.0;
  bool degenerate = false;  // x_max == x_min: every value maps to 0
};

// z = (x - x_min) / (x_max - x_min). Empty input is a ValidationError.
MinMaxScaled minmax_scale(std::span<const double> values);

struct CriterionScaling {
  double x_min = 0.0;
  double x_max = 0.0;
  double mean_factor = 1.0;
  bool degenerate = false;
};

// Per-site min-max scaled and mean-equalized criteria; every criterion's
// mean equals target_mean afterwards.
struct ScaledCriteria {
  std::array<std::vector<double>, 3> values;  // indexed by Criterion
  std::array<CriterionScaling, 3> scaling;
  double target_mean = 1.0;

  const std::vector<double>& of(Criterion c) const { return values[static_cast<int>(c)]; }
  double mean(Criterion c) const;
};

// Multiplies each min-max scaled criterion by target_mean / mean. A
// criterion whose mean is zero cannot be equalized (ValidationError naming it).
ScaledCriteria equalize_means(std::array<MinMaxScaled, 3> scaled, double target_mean = 1.0);

// Scales and equalizes lcoe, scenicness and network length over all candidates.
ScaledCriteria scale_criteria(const Instance& instance);

// Weighted site value: raw criteria when the weights select
// a single criterion, scaled-and-equalized criteria otherwise.
double site_cost(const CandidateSite& site, std::size_t site_index, const Weights& weights,
                 const ScaledCriteria* scaled);

// site_cost for every candidate; `scaled` may be null for single-criterion weights.
std::vector<double> site_costs(const Instance& instance, const Weights& weights, const ScaledCriteria* scaled);

struct HistogramBin {
  Criterion criterion;
  std::size_t bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

// Equal-width histogram of the equalized values over the common range [0, max].
std::vector<HistogramBin> scaled_histogram(const ScaledCriteria& scaled, std::size_t bins = 20);

}  // namespace windplan
