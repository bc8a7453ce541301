#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace windplan {

using SiteId = std::int64_t;
using MunicipalityId = std::int64_t;
using TurbineId = std::int64_t;
using TransformerId = std::int64_t;

enum class Region { South, NonSouth };

std::string to_string(Region region);
Region parse_region(const std::string& text);

struct CandidateSite {
  SiteId site_id = 0;
  MunicipalityId municipality_id = 0;
  double lat = 0.0;
  double lon = 0.0;
  double capacity_mw = 0.0;
  double lcoe_ct_kwh = 0.0;
  double scenicness = 0.0;
  double full_load_hours = 0.0;
  // Filled by geoprep::nearest_transformer.
  std::optional<double> network_length_km;
};

struct ExistingTurbine {
  TurbineId turbine_id = 0;
  MunicipalityId municipality_id = 0;
  double lat = 0.0;
  double lon = 0.0;
  double capacity_mw = 0.0;
};

struct Transformer {
  TransformerId transformer_id = 0;
  double lat = 0.0;
  double lon = 0.0;
  int voltage_kv = 0;
};

struct Municipality {
  MunicipalityId municipality_id = 0;
  std::string name;
  double population = 0.0;
  Region region = Region::NonSouth;
  std::int64_t state_id = 0;
  double area_km2 = 0.0;
  // Derived: sum of existing turbine capacity mapped to this municipality.
  double existing_capacity_mw = 0.0;
};

struct Instance {
  std::vector<CandidateSite> candidates;
  std::vector<Municipality> municipalities;
  std::vector<ExistingTurbine> existing;
  std::vector<Transformer> transformers;
  std::string metadata;

  // Position of a municipality in `municipalities`; throws ValidationError if unknown.
  std::size_t municipality_index(MunicipalityId id) const;
  // Dense municipality index for every candidate, aligned with `candidates`.
  std::vector<std::size_t> candidate_municipality_indices() const;
  bool has_network_lengths() const;
};

enum class ViolationKind {
  DuplicateId,
  RangeViolation,
  UnknownReference,
  MissingNetworkLength,
  InconsistentDerivedValue,
  EmptyInstance,
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string entity;  // "candidate", "municipality", "existing", "transformer", "instance"
  std::int64_t id = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary(std::size_t max_lines = 20) const;
};

struct ValidationOptions {
  // Solving requires every candidate to carry a network length.
  bool require_network_length = false;
};

ValidationReport validate_instance(const Instance& instance, const ValidationOptions& options = {});

// Throws ValidationError carrying the report summary when the instance is malformed.
void require_valid(const Instance& instance, const ValidationOptions& options = {});

struct CapacityTotals {
  std::map<MunicipalityId, double> per_municipality_mw;
  double national_mw = 0.0;
};

// Every municipality in the table appears (zero if it has no turbines); an
// existing turbine referencing an unknown municipality is a ValidationError.
CapacityTotals existing_capacity_totals(const Instance& instance);

// Writes existing_capacity_totals into Municipality::existing_capacity_mw.
void assign_existing_capacity(Instance& instance);

// Sum of candidate capacity per municipality, keyed by municipality id.
std::map<MunicipalityId, double> municipal_potentials(const Instance& instance);

}  // namespace windplan
