#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windplan/geoprep.hpp"
#include "windplan/metrics.hpp"
#include "windplan/objective.hpp"
#include "windplan/pareto.hpp"
#include "windplan/solver.hpp"

namespace windplan {

// FeatureCollection of Point features ([lon, lat]) in ascending site_id order.
std::string selection_geojson(const Instance& instance, const Selection& selection);
void write_geojson(const std::filesystem::path& path, const Instance& instance, const Selection& selection);

// site_id,municipality_id,capacity_mw,lcoe,scenicness,network_length_km
std::string selection_csv(const Instance& instance, const Selection& selection);
// Installed ids from a selection.csv (only the site_id column is required).
std::vector<SiteId> read_selection_ids(const std::filesystem::path& path);
// Decision vector for `ids`; an id not among the candidates is a ValidationError.
std::vector<std::uint8_t> decision_from_ids(const Instance& instance, const std::vector<SiteId>& ids);

nlohmann::json summary_json(const Selection& selection);
nlohmann::json exclusion_report_json(const geoprep::ExclusionReport& report);
nlohmann::json metrics_json(const EquityReport& equity, const RegionalStats& stats);

// step,cap,achieved_min,gap
std::string front_csv(const ParetoFront& front);
// criterion,bin,lo,hi,count,mean
std::string histogram_csv(const ScaledCriteria& scaled, std::size_t bins = 20);

// JSON text with a trailing newline; non-finite numbers become null.
std::string dump_json(const nlohmann::json& j);

}  // namespace windplan
