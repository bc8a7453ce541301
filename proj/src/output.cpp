#include "windplan/output.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "windplan/csv_io.hpp"
#include "windplan/errors.hpp"

namespace windplan {

namespace {

using nlohmann::json;

std::vector<std::size_t> installed_positions(const Instance& instance, const Selection& selection) {
  if (selection.decision.size() != instance.candidates.size()) {
    throw ValidationError("selection does not belong to this instance");
  }
  std::vector<std::size_t> picked;
  for (std::size_t k = 0; k < selection.decision.size(); ++k) {
    if (selection.decision[k]) picked.push_back(k);
  }
  std::sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
    return instance.candidates[a].site_id < instance.candidates[b].site_id;
  });
  return picked;
}

json totals_json(const CriterionTotals& t) {
  return {{"lcoe", t.lcoe}, {"scenicness", t.scenicness}, {"network_length_km", t.network_length_km}};
}

}  // namespace

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

std::string selection_geojson(const Instance& instance, const Selection& selection) {
  json features = json::array();
  for (std::size_t k : installed_positions(instance, selection)) {
    const CandidateSite& c = instance.candidates[k];
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {c.lon, c.lat}}}},
                        {"properties",
                         {{"site_id", c.site_id},
                          {"capacity_mw", c.capacity_mw},
                          {"lcoe", c.lcoe_ct_kwh},
                          {"scenicness", c.scenicness},
                          {"network_length_km", c.network_length_km ? json(*c.network_length_km) : json(nullptr)},
                          {"municipality_id", c.municipality_id}}}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump() + "\n";
}

void write_geojson(const std::filesystem::path& path, const Instance& instance, const Selection& selection) {
  write_text_file(path, selection_geojson(instance, selection));
}

std::string selection_csv(const Instance& instance, const Selection& selection) {
  std::ostringstream out;
  out << "site_id,municipality_id,capacity_mw,lcoe,scenicness,network_length_km\n";
  for (std::size_t k : installed_positions(instance, selection)) {
    const CandidateSite& c = instance.candidates[k];
    out << c.site_id << ',' << c.municipality_id << ',' << format_double(c.capacity_mw) << ','
        << format_double(c.lcoe_ct_kwh) << ',' << format_double(c.scenicness) << ','
        << (c.network_length_km ? format_double(*c.network_length_km) : "") << '\n';
  }
  return out.str();
}

std::vector<SiteId> read_selection_ids(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  const std::size_t col = table.column("site_id", path.string());
  std::vector<SiteId> ids;
  ids.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ids.push_back(parse_int(table.rows[r].at(col), path.string() + " row " + std::to_string(r + 2)));
  }
  return ids;
}

std::vector<std::uint8_t> decision_from_ids(const Instance& instance, const std::vector<SiteId>& ids) {
  std::unordered_map<SiteId, std::size_t> pos;
  pos.reserve(instance.candidates.size());
  for (std::size_t k = 0; k < instance.candidates.size(); ++k) pos.emplace(instance.candidates[k].site_id, k);
  std::vector<std::uint8_t> decision(instance.candidates.size(), 0);
  for (SiteId id : ids) {
    auto it = pos.find(id);
    if (it == pos.end()) throw ValidationError("selected site_id " + std::to_string(id) + " is not a candidate");
    decision[it->second] = 1;
  }
  return decision;
}

json summary_json(const Selection& s) {
  return {{"installed_count", s.count()},
          {"capacity_mw", s.capacity_mw},
          {"objective", s.objective},
          {"totals", totals_json(s.totals)},
          {"means", totals_json(s.means)},
          {"capacity_weighted_means", totals_json(s.capacity_weighted_means)},
          {"lower_bound", s.lower_bound},
          {"gap", s.gap},
          {"proven_optimal", s.proven_optimal},
          {"diagnostics",
           {{"multipliers",
             {{"lcoe", s.diagnostics.multipliers[0]},
              {"scenicness", s.diagnostics.multipliers[1]},
              {"network_length", s.diagnostics.multipliers[2]}}},
            {"bisection_iterations", s.diagnostics.bisection_iterations},
            {"local_search_moves", s.diagnostics.local_search_moves},
            {"exact_nodes", s.diagnostics.exact_nodes}}}};
}

json exclusion_report_json(const geoprep::ExclusionReport& r) {
  return {{"input_count", r.input_count},
          {"input_capacity_mw", r.input_capacity_mw},
          {"excluded_count", r.excluded_count},
          {"excluded_capacity_mw", r.excluded_capacity_mw},
          {"excluded_share_count", r.excluded_share_count},
          {"excluded_share_capacity", r.excluded_share_capacity}};
}

json metrics_json(const EquityReport& equity, const RegionalStats& stats) {
  json states = json::array();
  for (const StateStats& s : stats.states) {
    states.push_back({{"state_id", s.state_id},
                      {"area_km2", s.area_km2},
                      {"turbines", s.turbines},
                      {"capacity_mw", s.capacity_mw},
                      {"turbines_per_1000_km2", s.turbines_per_1000_km2},
                      {"capacity_share_pct", s.capacity_share_pct},
                      {"mean_scenicness", s.mean_scenicness ? json(*s.mean_scenicness) : json(nullptr)}});
  }
  return {{"gini", equity.gini},
          {"regional_equity_pct", equity.regional_equity_pct},
          {"south_quota_pct", stats.south.pct},
          {"south_quota_nothing_added", stats.south.nothing_added},
          {"municipalities_counted", equity.x.size()},
          {"municipalities_zero_population", equity.excluded_zero_population},
          {"all_zero", equity.all_zero},
          {"per_state", states}};
}

std::string front_csv(const ParetoFront& front) {
  std::ostringstream out;
  out << "step,cap,achieved_min,gap\n";
  for (const ParetoPoint& p : front.points) {
    out << p.step << ',' << format_double(p.cap) << ',' << format_double(p.achieved_min) << ','
        << (std::isfinite(p.selection.gap) ? format_double(p.selection.gap) : "inf") << '\n';
  }
  return out.str();
}

std::string histogram_csv(const ScaledCriteria& scaled, std::size_t bins) {
  std::ostringstream out;
  out << "criterion,bin,lo,hi,count,mean\n";
  for (const HistogramBin& b : scaled_histogram(scaled, bins)) {
    out << to_string(b.criterion) << ',' << b.bin << ',' << format_double(b.lo) << ',' << format_double(b.hi) << ','
        << b.count << ',' << format_double(scaled.mean(b.criterion)) << '\n';
  }
  return out.str();
}

}  // namespace windplan
