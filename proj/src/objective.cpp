#include "windplan/objective.hpp"

#include <algorithm>
#include <cmath>

#include "windplan/errors.hpp"

namespace windplan {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::Lcoe: return "lcoe";
    case Criterion::Scenicness: return "scenicness";
    case Criterion::NetworkLength: return "network_length";
  }
  return "unknown";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "lcoe") return Criterion::Lcoe;
  if (text == "scenicness" || text == "scenic") return Criterion::Scenicness;
  if (text == "network_length" || text == "network" || text == "length") return Criterion::NetworkLength;
  throw ValidationError("unknown criterion '" + text + "' (expected lcoe, scenicness or network_length)");
}

double criterion_value(const CandidateSite& site, Criterion c) {
  switch (c) {
    case Criterion::Lcoe: return site.lcoe_ct_kwh;
    case Criterion::Scenicness: return site.scenicness;
    case Criterion::NetworkLength:
      if (!site.network_length_km) {
        throw ValidationError("site " + std::to_string(site.site_id) + " has no network length (run prep)");
      }
      return *site.network_length_km;
  }
  return 0.0;
}

double Weights::of(Criterion c) const {
  switch (c) {
    case Criterion::Lcoe: return lcoe;
    case Criterion::Scenicness: return scenicness;
    case Criterion::NetworkLength: return network_length;
  }
  return 0.0;
}

bool Weights::is_single_criterion() const {
  int ones = 0, zeros = 0;
  for (Criterion c : kAllCriteria) {
    if (of(c) == 1.0) ++ones;
    else if (of(c) == 0.0) ++zeros;
  }
  return ones == 1 && zeros == 2;
}

void Weights::validate() const {
  bool any_positive = false;
  for (Criterion c : kAllCriteria) {
    const double w = of(c);
    if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("weight for " + to_string(c) + " outside [0, 1]");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw ValidationError("at least one weight must be positive");
}

MinMaxScaled minmax_scale(std::span<const double> values) {
  if (values.empty()) throw ValidationError("minmax_scale: empty input");
  MinMaxScaled out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.x_min = *lo;
  out.x_max = *hi;
  out.values.resize(values.size(), 0.0);
  if (out.x_max == out.x_min) {
    out.degenerate = true;
    return out;
  }
  const double range = out.x_max - out.x_min;
  for (std::size_t k = 0; k < values.size(); ++k) out.values[k] = (values[k] - out.x_min) / range;
  return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double ScaledCriteria::mean(Criterion c) const { return mean_of(of(c)); }

ScaledCriteria equalize_means(std::array<MinMaxScaled, 3> scaled, double target_mean) {
  if (!(target_mean > 0.0)) throw ValidationError("target mean must be > 0");
  ScaledCriteria out;
  out.target_mean = target_mean;
  for (Criterion c : kAllCriteria) {
    const int k = static_cast<int>(c);
    MinMaxScaled& s = scaled[k];
    const double m = mean_of(s.values);
    if (!(m > 0.0)) {
      throw ValidationError("cannot equalize criterion " + to_string(c) + ": scaled mean is zero");
    }
    const double factor = target_mean / m;
    for (double& v : s.values) v *= factor;
    out.values[k] = std::move(s.values);
    out.scaling[k] = {s.x_min, s.x_max, factor, s.degenerate};
  }
  return out;
}

ScaledCriteria scale_criteria(const Instance& instance) {
  std::array<MinMaxScaled, 3> scaled;
  for (Criterion c : kAllCriteria) {
    std::vector<double> raw;
    raw.reserve(instance.candidates.size());
    for (const auto& site : instance.candidates) raw.push_back(criterion_value(site, c));
    scaled[static_cast<int>(c)] = minmax_scale(raw);
  }
  return equalize_means(std::move(scaled));
}

double site_cost(const CandidateSite& site, std::size_t site_index, const Weights& weights,
                 const ScaledCriteria* scaled) {
  double total = 0.0;
  if (weights.is_single_criterion()) {
    for (Criterion c : kAllCriteria) {
      if (weights.of(c) != 0.0) total += weights.of(c) * criterion_value(site, c);
    }
    return total;
  }
  if (scaled == nullptr) throw ValidationError("multi-criteria weights require scaled criteria");
  for (Criterion c : kAllCriteria) {
    if (weights.of(c) != 0.0) total += weights.of(c) * scaled->of(c).at(site_index);
  }
  return total;
}

std::vector<double> site_costs(const Instance& instance, const Weights& weights, const ScaledCriteria* scaled) {
  weights.validate();
  std::vector<double> out(instance.candidates.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = site_cost(instance.candidates[k], k, weights, scaled);
  return out;
}

std::vector<HistogramBin> scaled_histogram(const ScaledCriteria& scaled, std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  double top = 0.0;
  for (Criterion c : kAllCriteria) {
    for (double v : scaled.of(c)) top = std::max(top, v);
  }
  if (top <= 0.0) top = 1.0;
  const double width = top / static_cast<double>(bins);
  std::vector<HistogramBin> out;
  for (Criterion c : kAllCriteria) {
    std::vector<std::size_t> counts(bins, 0);
    for (double v : scaled.of(c)) {
      auto b = static_cast<std::size_t>(v / width);
      counts[std::min(b, bins - 1)]++;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      out.push_back({c, b, width * static_cast<double>(b), width * static_cast<double>(b + 1), counts[b]});
    }
  }
  return out;
}

}  // namespace windplan
