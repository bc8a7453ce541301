#pragma once

#include <cstdint>
#include <string>

#include "windplan/domain.hpp"

namespace windplan {

struct SynthSpec {
  std::uint64_t seed = 1;
  std::size_t n_sites = 2000;
  std::size_t n_municipalities = 150;
  std::size_t n_states = 4;
  std::size_t n_transformers = 100;
  std::size_t n_existing = 40;

  double capacity_min_mw = 4.2;
  double capacity_max_mw = 4.2;
  double existing_capacity_min_mw = 1.5;
  double existing_capacity_max_mw = 2.5;

  // Target Pearson correlation between LCOE and scenicness.
  double lcoe_scenicness_correlation = -0.2;
  // Length scale (km) of the smooth scenicness field.
  double scenicness_smoothness_km = 30.0;

  double lat_min = 47.3;
  double lat_max = 55.0;
  double lon_min = 5.9;
  double lon_max = 15.0;

  // LCOE = shift + exp(ln(median_excess) + sigma * u), u standard normal.
  double lcoe_shift = 3.0;
  double lcoe_median_excess = 2.0;
  double lcoe_sigma = 0.45;

  double population_median = 2000.0;
  double population_sigma = 1.3;

  // Share of states (by center latitude, southernmost first) tagged South; at least one.
  double south_state_fraction = 0.25;
  // Existing turbines sit next to candidates drawn from this cheapest-LCOE fraction.
  double existing_low_lcoe_fraction = 0.2;
  double existing_jitter_m = 150.0;
  double transformer_20kv_share = 0.47;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// 160k sites, 11k municipalities, 16 states over a Germany-sized box.
SynthSpec germany_like_spec();

// Fields absent from the JSON object keep their SynthSpec defaults; unknown
// fields are a ValidationError.
SynthSpec parse_synth_spec(const std::string& json_text);
std::string synth_spec_to_json(const SynthSpec& spec);

// Copula correlation that yields the requested Pearson correlation between
// the scenicness and LCOE marginals. ValidationError when unreachable.
double calibrate_copula_correlation(const SynthSpec& spec);

// Deterministic for a given spec (including seed).
Instance generate(const SynthSpec& spec);

}  // namespace windplan
