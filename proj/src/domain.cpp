#include "windplan/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "windplan/errors.hpp"

namespace windplan {

std::string to_string(Region region) { return region == Region::South ? "South" : "NonSouth"; }

Region parse_region(const std::string& text) {
  if (text == "South") return Region::South;
  if (text == "NonSouth") return Region::NonSouth;
  throw ValidationError("unknown region_tag '" + text + "' (expected South or NonSouth)");
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::RangeViolation: return "RangeViolation";
    case ViolationKind::UnknownReference: return "UnknownReference";
    case ViolationKind::MissingNetworkLength: return "MissingNetworkLength";
    case ViolationKind::InconsistentDerivedValue: return "InconsistentDerivedValue";
    case ViolationKind::EmptyInstance: return "EmptyInstance";
  }
  return "Unknown";
}

std::size_t Instance::municipality_index(MunicipalityId id) const {
  for (std::size_t k = 0; k < municipalities.size(); ++k) {
    if (municipalities[k].municipality_id == id) return k;
  }
  throw ValidationError("unknown municipality_id " + std::to_string(id));
}

std::vector<std::size_t> Instance::candidate_municipality_indices() const {
  std::unordered_map<MunicipalityId, std::size_t> lookup;
  lookup.reserve(municipalities.size());
  for (std::size_t k = 0; k < municipalities.size(); ++k) lookup.emplace(municipalities[k].municipality_id, k);
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (const auto& site : candidates) {
    auto it = lookup.find(site.municipality_id);
    if (it == lookup.end()) {
      throw ValidationError("candidate " + std::to_string(site.site_id) + " references unknown municipality_id " +
                            std::to_string(site.municipality_id));
    }
    out.push_back(it->second);
  }
  return out;
}

bool Instance::has_network_lengths() const {
  return std::all_of(candidates.begin(), candidates.end(),
                     [](const CandidateSite& c) { return c.network_length_km.has_value(); });
}

std::string ValidationReport::summary(std::size_t max_lines) const {
  std::ostringstream out;
  out << violations.size() << " violation(s)";
  for (std::size_t k = 0; k < violations.size() && k < max_lines; ++k) {
    const auto& v = violations[k];
    out << "\n  " << to_string(v.kind) << " " << v.entity << " " << v.id << ": " << v.message;
  }
  if (violations.size() > max_lines) out << "\n  ...";
  return out.str();
}

namespace {

bool valid_latlon(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

class ReportBuilder {
 public:
  void add(ViolationKind kind, std::string entity, std::int64_t id, std::string message) {
    report_.violations.push_back({kind, std::move(entity), id, std::move(message)});
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_instance(const Instance& instance, const ValidationOptions& options) {
  ReportBuilder r;
  if (instance.candidates.empty()) r.add(ViolationKind::EmptyInstance, "instance", 0, "no candidate sites");

  std::unordered_set<MunicipalityId> muni_ids;
  for (const auto& m : instance.municipalities) {
    if (!muni_ids.insert(m.municipality_id).second) {
      r.add(ViolationKind::DuplicateId, "municipality", m.municipality_id, "duplicate municipality_id");
    }
    if (!(m.population >= 0.0) || !std::isfinite(m.population)) {
      r.add(ViolationKind::RangeViolation, "municipality", m.municipality_id, "population must be >= 0");
    }
    if (!(m.area_km2 > 0.0) || !std::isfinite(m.area_km2)) {
      r.add(ViolationKind::RangeViolation, "municipality", m.municipality_id, "area must be > 0");
    }
  }

  std::unordered_set<SiteId> site_ids;
  for (const auto& c : instance.candidates) {
    if (!site_ids.insert(c.site_id).second) r.add(ViolationKind::DuplicateId, "candidate", c.site_id, "duplicate site_id");
    if (!muni_ids.contains(c.municipality_id)) {
      r.add(ViolationKind::UnknownReference, "candidate", c.site_id,
            "municipality_id " + std::to_string(c.municipality_id) + " not in municipality table");
    }
    if (!valid_latlon(c.lat, c.lon)) r.add(ViolationKind::RangeViolation, "candidate", c.site_id, "coordinates out of range");
    if (!(c.capacity_mw > 0.0) || !std::isfinite(c.capacity_mw)) {
      r.add(ViolationKind::RangeViolation, "candidate", c.site_id, "capacity must be > 0");
    }
    if (!(c.lcoe_ct_kwh > 0.0) || !std::isfinite(c.lcoe_ct_kwh)) {
      r.add(ViolationKind::RangeViolation, "candidate", c.site_id, "lcoe must be > 0");
    }
    if (!(c.scenicness >= 1.0 && c.scenicness <= 9.0)) {
      r.add(ViolationKind::RangeViolation, "candidate", c.site_id, "scenicness outside [1, 9]");
    }
    if (!(c.full_load_hours >= 0.0)) {
      r.add(ViolationKind::RangeViolation, "candidate", c.site_id, "full_load_hours must be >= 0");
    }
    if (c.network_length_km) {
      if (!(*c.network_length_km >= 0.0) || !std::isfinite(*c.network_length_km)) {
        r.add(ViolationKind::RangeViolation, "candidate", c.site_id, "network length must be >= 0");
      }
    } else if (options.require_network_length) {
      r.add(ViolationKind::MissingNetworkLength, "candidate", c.site_id, "network length not computed (run prep)");
    }
  }

  std::unordered_set<TurbineId> turbine_ids;
  std::map<MunicipalityId, std::vector<double>> existing_by_muni;
  for (const auto& t : instance.existing) {
    if (!turbine_ids.insert(t.turbine_id).second) {
      r.add(ViolationKind::DuplicateId, "existing", t.turbine_id, "duplicate turbine_id");
    }
    if (!(t.capacity_mw > 0.0) || !std::isfinite(t.capacity_mw)) {
      r.add(ViolationKind::RangeViolation, "existing", t.turbine_id, "capacity must be > 0");
    }
    if (!valid_latlon(t.lat, t.lon)) r.add(ViolationKind::RangeViolation, "existing", t.turbine_id, "coordinates out of range");
    if (!muni_ids.contains(t.municipality_id)) {
      r.add(ViolationKind::UnknownReference, "existing", t.turbine_id,
            "municipality_id " + std::to_string(t.municipality_id) + " not in municipality table");
    }
  }

  std::unordered_set<TransformerId> transformer_ids;
  for (const auto& t : instance.transformers) {
    if (!transformer_ids.insert(t.transformer_id).second) {
      r.add(ViolationKind::DuplicateId, "transformer", t.transformer_id, "duplicate transformer_id");
    }
    if (t.voltage_kv != 20 && t.voltage_kv != 110) {
      r.add(ViolationKind::RangeViolation, "transformer", t.transformer_id, "voltage must be 20 or 110 kV");
    }
    if (!valid_latlon(t.lat, t.lon)) {
      r.add(ViolationKind::RangeViolation, "transformer", t.transformer_id, "coordinates out of range");
    }
  }

  // Derived existing capacity must match the turbine table; only checked
  // when every turbine resolves, otherwise the reference error is enough.
  bool all_resolved = std::all_of(instance.existing.begin(), instance.existing.end(),
                                  [&](const ExistingTurbine& t) { return muni_ids.contains(t.municipality_id); });
  if (all_resolved && muni_ids.size() == instance.municipalities.size()) {
    const CapacityTotals totals = existing_capacity_totals(instance);
    for (const auto& m : instance.municipalities) {
      const double expected = totals.per_municipality_mw.at(m.municipality_id);
      if (m.existing_capacity_mw != expected) {
        r.add(ViolationKind::InconsistentDerivedValue, "municipality", m.municipality_id,
              "existing_capacity does not equal the sum of its existing turbines");
      }
    }
  }
  return r.take();
}

void require_valid(const Instance& instance, const ValidationOptions& options) {
  const ValidationReport report = validate_instance(instance, options);
  if (!report.ok()) throw ValidationError("invalid instance: " + report.summary());
}

CapacityTotals existing_capacity_totals(const Instance& instance) {
  CapacityTotals totals;
  for (const auto& m : instance.municipalities) totals.per_municipality_mw[m.municipality_id] = 0.0;

  // Canonical summation order keeps the totals independent of file order.
  std::vector<const ExistingTurbine*> ordered;
  ordered.reserve(instance.existing.size());
  for (const auto& t : instance.existing) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const ExistingTurbine* a, const ExistingTurbine* b) { return a->turbine_id < b->turbine_id; });

  for (const ExistingTurbine* t : ordered) {
    auto it = totals.per_municipality_mw.find(t->municipality_id);
    if (it == totals.per_municipality_mw.end()) {
      throw ValidationError("existing turbine " + std::to_string(t->turbine_id) + " maps to unknown municipality_id " +
                            std::to_string(t->municipality_id));
    }
    it->second += t->capacity_mw;
  }
  for (const auto& [id, mw] : totals.per_municipality_mw) totals.national_mw += mw;
  return totals;
}

void assign_existing_capacity(Instance& instance) {
  const CapacityTotals totals = existing_capacity_totals(instance);
  for (auto& m : instance.municipalities) m.existing_capacity_mw = totals.per_municipality_mw.at(m.municipality_id);
}

std::map<MunicipalityId, double> municipal_potentials(const Instance& instance) {
  std::map<MunicipalityId, double> out;
  for (const auto& m : instance.municipalities) out[m.municipality_id] = 0.0;
  std::vector<const CandidateSite*> ordered;
  ordered.reserve(instance.candidates.size());
  for (const auto& c : instance.candidates) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const CandidateSite* a, const CandidateSite* b) { return a->site_id < b->site_id; });
  for (const CandidateSite* c : ordered) out[c->municipality_id] += c->capacity_mw;
  return out;
}

}  // namespace windplan
