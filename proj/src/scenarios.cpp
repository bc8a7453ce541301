#include "windplan/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "windplan/csv_io.hpp"
#include "windplan/errors.hpp"
#include "windplan/parallel.hpp"

namespace windplan {

namespace {

using nlohmann::json;

constexpr std::array<const char*, 3> kCapKeys = {"max_total_lcoe", "max_total_scenicness",
                                                 "max_total_network_length_km"};

ScenarioConfig make(std::string name, double wc, double ws, double wl, bool equity, double total) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.weights = {wc, ws, wl};
  c.equity = equity;
  c.total_capacity_mw = total;
  return c;
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  if (!j.at(key).is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

ScenarioConfig from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": scenario must be a JSON object");
  static const std::set<std::string> known = {"name", "w_c", "w_s", "w_l", "equity", "total_capacity_mw",
                                              kCapKeys[0], kCapKeys[1], kCapKeys[2]};
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw ValidationError(where + ": unknown field '" + item.key() + "'");
  }
  ScenarioConfig c;
  if (!j.contains("name") || !j.at("name").is_string()) throw ValidationError(where + ": missing string 'name'");
  c.name = j.at("name").get<std::string>();
  if (c.name.empty()) throw ValidationError(where + ": empty scenario name");
  c.weights = {number(j, "w_c", where), number(j, "w_s", where), number(j, "w_l", where)};
  c.weights.validate();
  if (j.contains("equity")) {
    if (!j.at("equity").is_boolean()) throw ValidationError(where + ": 'equity' must be true or false");
    c.equity = j.at("equity").get<bool>();
  }
  c.total_capacity_mw = number(j, "total_capacity_mw", where);
  if (!(c.total_capacity_mw > 0.0) || !std::isfinite(c.total_capacity_mw)) {
    throw ValidationError(where + ": total_capacity_mw must be > 0");
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (j.contains(kCapKeys[k])) c.max_total[k] = number(j, kCapKeys[k], where);
  }
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

std::string number_text(double v) { return std::isfinite(v) ? format_double(v) : (v > 0 ? "inf" : "-inf"); }

}  // namespace

std::vector<ScenarioConfig> builtin_grid() {
  const double base = kBaseTotalCapacityMw, high = kHighTotalCapacityMw;
  std::vector<ScenarioConfig> grid;
  struct Row {
    const char* name;
    double wc, ws, wl;
    double total;
  };
  const Row rows[] = {
      {"Base_LCOE", 1, 0, 0, base},    {"Base_Scenic", 0, 1, 0, base}, {"Base_Network", 0, 0, 1, base},
      {"Base_all", 1, 1, 1, base},     {"High_LCOE", 1, 0, 0, high},   {"High_Scenic", 0, 1, 0, high},
      {"High_Network", 0, 0, 1, high},
  };
  for (const Row& r : rows) {
    grid.push_back(make(r.name, r.wc, r.ws, r.wl, false, r.total));
    grid.push_back(make(std::string(r.name) + "_E", r.wc, r.ws, r.wl, true, r.total));
  }
  return grid;
}

std::vector<ScenarioConfig> parse_grid_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_array()) throw ValidationError("grid file must hold a JSON list of scenarios");
  std::vector<ScenarioConfig> grid;
  std::set<std::string> names;
  for (std::size_t k = 0; k < j.size(); ++k) {
    grid.push_back(from_json(j[k], "scenario " + std::to_string(k)));
    if (!names.insert(grid.back().name).second) {
      throw ValidationError("duplicate scenario name '" + grid.back().name + "'");
    }
  }
  if (grid.empty()) throw ValidationError("grid file holds no scenarios");
  return grid;
}

ScenarioConfig parse_scenario_json(const std::string& text) { return from_json(parse_json(text), "scenario"); }

std::string scenario_to_json(const ScenarioConfig& c) {
  json j = {{"name", c.name},
            {"w_c", c.weights.lcoe},
            {"w_s", c.weights.scenicness},
            {"w_l", c.weights.network_length},
            {"equity", c.equity},
            {"total_capacity_mw", c.total_capacity_mw}};
  for (std::size_t k = 0; k < 3; ++k) {
    if (c.max_total[k]) j[kCapKeys[k]] = *c.max_total[k];
  }
  return j.dump(2);
}

ScenarioProblem scenario_constraints(const Instance& instance, const ScenarioConfig& config, double scale,
                                     const MwTable* cached_floors) {
  if (!(scale > 0.0)) throw ValidationError("scale must be > 0");
  ScenarioProblem p;
  p.total_target_mw = config.total_capacity_mw * scale;
  const double existing = existing_capacity_totals(instance).national_mw;
  const double added = p.total_target_mw - existing;
  if (!(added > 0.0)) {
    throw ValidationError("scenario " + config.name + ": total target " + std::to_string(p.total_target_mw) +
                          " MW does not exceed existing capacity " + std::to_string(existing) + " MW");
  }
  p.constraints.cap_obj_mw = added;
  p.constraints.max_total = config.max_total;
  if (config.equity) {
    p.constraints.equity_floors =
        cached_floors ? *cached_floors
                      : equity_floors(instance.municipalities, p.total_target_mw, municipal_potentials(instance));
  }
  return p;
}

std::vector<ScenarioResult> run_grid(const Instance& instance, const std::vector<ScenarioConfig>& grid,
                                     const GridOptions& options) {
  if (!(options.scale > 0.0)) throw ValidationError("scale must be > 0");
  std::set<std::string> names;
  for (const auto& c : grid) {
    if (!names.insert(c.name).second) throw ValidationError("duplicate scenario name '" + c.name + "'");
  }
  const double existing = existing_capacity_totals(instance).national_mw;
  double potential = 0.0;
  for (const auto& site : instance.candidates) potential += site.capacity_mw;
  for (const auto& c : grid) {
    const double added = c.total_capacity_mw * options.scale - existing;
    if (added > potential + feasibility_slack(potential)) {
      throw InfeasibleError("scenario " + c.name + ": added target " + std::to_string(added) +
                            " MW exceeds total potential " + std::to_string(potential) + " MW (shortfall " +
                            std::to_string(added - potential) + " MW)");
    }
  }

  std::map<double, MwTable> floors;
  const auto potentials = municipal_potentials(instance);
  for (const auto& c : grid) {
    const double total = c.total_capacity_mw * options.scale;
    if (c.equity && !floors.contains(total)) floors[total] = equity_floors(instance.municipalities, total, potentials);
  }

  std::vector<ScenarioResult> results(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t q) {
    const ScenarioConfig& c = grid[q];
    ScenarioResult& r = results[q];
    r.name = c.name;
    r.config = c;
    const auto start = std::chrono::steady_clock::now();
    try {
      const double total = c.total_capacity_mw * options.scale;
      const auto problem = scenario_constraints(instance, c, options.scale, c.equity ? &floors.at(total) : nullptr);
      r.total_target_mw = problem.total_target_mw;
      r.added_target_mw = problem.constraints.cap_obj_mw;
      r.selection = solve(instance, c.weights, problem.constraints, options.solve);
      r.equity_pct = regional_equity(instance, r.selection.decision).regional_equity_pct;
      r.south_quota_pct = south_quota(instance, r.selection.decision).pct;
      r.ok = true;
    } catch (const ValidationError& e) {
      r.error = e.what();
    } catch (const InfeasibleError& e) {
      r.error = e.what();
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return results;
}

std::string results_csv(const std::vector<ScenarioResult>& results) {
  std::ostringstream out;
  out << "name,w_c,w_s,w_l,equity,total_capacity_mw,added_target_mw,status,installed,added_capacity_mw,"
         "mean_lcoe_ct_kwh,mean_scenicness,mean_network_length_km,cw_mean_lcoe_ct_kwh,cw_mean_scenicness,"
         "cw_mean_network_length_km,equity_pct,south_quota_pct,objective,lower_bound,gap,proven_optimal,error\n";
  for (const ScenarioResult& r : results) {
    const ScenarioConfig& c = r.config;
    out << csv_escape(r.name) << ',' << format_double(c.weights.lcoe) << ',' << format_double(c.weights.scenicness)
        << ',' << format_double(c.weights.network_length) << ',' << (c.equity ? "yes" : "no") << ','
        << format_double(r.total_target_mw) << ',' << format_double(r.added_target_mw) << ','
        << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) {
      const Selection& s = r.selection;
      out << s.count() << ',' << format_double(s.capacity_mw) << ',' << format_double(s.means.lcoe) << ','
          << format_double(s.means.scenicness) << ',' << format_double(s.means.network_length_km) << ','
          << format_double(s.capacity_weighted_means.lcoe) << ','
          << format_double(s.capacity_weighted_means.scenicness) << ','
          << format_double(s.capacity_weighted_means.network_length_km) << ',' << format_double(r.equity_pct)
          << ',' << format_double(r.south_quota_pct) << ',' << format_double(s.objective) << ','
          << format_double(s.lower_bound) << ',' << number_text(s.gap) << ',' << (s.proven_optimal ? "yes" : "no")
          << ",\n";
    } else {
      out << ",,,,,,,,,,,,,," << csv_escape(r.error) << '\n';
    }
  }
  return out.str();
}

std::vector<RadarRow> scenario_radar(const std::vector<ScenarioResult>& results) {
  std::vector<RadarInput> inputs;
  for (const ScenarioResult& r : results) {
    if (!r.ok) continue;
    RadarInput in;
    in.name = r.name;
    in.group = r.name.substr(0, r.name.find('_'));
    in.values = {r.selection.means.lcoe, r.selection.means.scenicness, r.selection.means.network_length_km,
                 r.equity_pct};
    inputs.push_back(in);
  }
  return radar_values(inputs);
}

std::string radar_csv(const std::vector<RadarRow>& rows) {
  std::ostringstream out;
  out << "name,group,lcoe,scenicness,network_length,equity,degenerate_axes\n";
  for (const RadarRow& r : rows) {
    out << csv_escape(r.name) << ',' << csv_escape(r.group);
    std::string flags;
    static const char* axes[kRadarAxes] = {"lcoe", "scenicness", "network_length", "equity"};
    for (std::size_t a = 0; a < kRadarAxes; ++a) {
      out << ',' << format_double(r.values[a]);
      if (r.degenerate[a]) flags += (flags.empty() ? "" : ";") + std::string(axes[a]);
    }
    out << ',' << flags << '\n';
  }
  return out.str();
}

}  // namespace windplan
