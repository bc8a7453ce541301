#include "windplan/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "windplan/csv_io.hpp"
#include "windplan/errors.hpp"
#include "windplan/geoprep.hpp"
#include "windplan/manifest.hpp"
#include "windplan/metrics.hpp"
#include "windplan/objective.hpp"
#include "windplan/output.hpp"
#include "windplan/parallel.hpp"
#include "windplan/pareto.hpp"
#include "windplan/scenarios.hpp"
#include "windplan/solver.hpp"
#include "windplan/synth.hpp"

namespace windplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path normalized(const fs::path& p) {
  std::error_code ec;
  auto full = fs::weakly_canonical(fs::absolute(p), ec);
  return ec ? fs::absolute(p).lexically_normal() : full;
}

// Creates an output directory that is distinct from every input directory.
void prepare_output_dir(const fs::path& out, const std::vector<fs::path>& input_dirs) {
  const auto target = normalized(out);
  for (const auto& in : input_dirs) {
    if (normalized(in) == target) {
      throw ValidationError("output directory " + out.string() + " is an input directory; choose another --out");
    }
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory " + out.string());
}

fs::path output_parent(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

void require_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("instance directory " + dir.string() + " does not exist");
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "inf"; }

struct Options {
  // synth
  std::string spec_file, preset;
  std::optional<std::uint64_t> seed;
  // shared
  std::string instance, out;
  double scale = 1.0;
  // prep
  double buffer_m = geoprep::kDefaultBufferDiameterM;
  // scale
  std::size_t bins = 20;
  // solve
  std::string scenario;
  // sweep
  std::string optimize = "lcoe", sweep = "scenicness";
  int steps = 10;
  double factor = 0.9;
  bool equity = false;
  double total_mw = kBaseTotalCapacityMw;
  // scenarios
  std::string grid = "builtin";
  // metrics
  std::string selection;
  bool exclude_existing = false;
};

int run_synth(const Options& o, std::ostream& out) {
  SynthSpec spec;
  RunManifest manifest("synth");
  if (!o.spec_file.empty()) {
    spec = parse_synth_spec(read_text_file(o.spec_file));
    manifest.add_input(o.spec_file);
  } else if (o.preset == "germany-like") {
    spec = germany_like_spec();
  } else if (o.preset == "default" || o.preset.empty()) {
    spec = SynthSpec{};
  } else {
    throw ValidationError("unknown preset '" + o.preset + "' (expected germany-like or default)");
  }
  if (o.seed) spec.seed = *o.seed;
  spec.validate();
  prepare_output_dir(o.out, {});
  const Instance inst = manifest.stage("generate", [&] { return generate(spec); });
  manifest.stage("write", [&] {
    write_instance(inst, o.out);
    return 0;
  });
  manifest.set_config(json::parse(synth_spec_to_json(spec)));
  manifest.write(o.out);
  out << "synth: " << inst.candidates.size() << " sites, " << inst.municipalities.size() << " municipalities, "
      << inst.existing.size() << " existing turbines, " << inst.transformers.size() << " transformers -> " << o.out
      << "\n";
  return kExitOk;
}

Instance load(const Options& o, RunManifest& manifest) {
  require_dir(o.instance);
  IngestReport ingest;
  Instance inst = manifest.stage("read", [&] { return read_instance(o.instance, &ingest); });
  manifest.add_input(o.instance);
  if (ingest.transformers_dropped_by_voltage > 0) {
    manifest.warn(std::to_string(ingest.transformers_dropped_by_voltage) +
                  " transformers outside 20/110 kV were dropped");
  }
  return inst;
}

int run_prep(const Options& o, std::ostream& out) {
  RunManifest manifest("prep");
  const Instance input = load(o, manifest);
  prepare_output_dir(o.out, {o.instance});
  const auto prepared = manifest.stage("prepare", [&] { return geoprep::prepare(input, o.buffer_m); });
  manifest.stage("write", [&] {
    write_instance(prepared.instance, o.out);
    write_text_file(fs::path(o.out) / "exclusion_report.json", dump_json(exclusion_report_json(prepared.exclusion)));
    return 0;
  });
  manifest.set_config({{"buffer_diameter_m", o.buffer_m}});
  manifest.write(o.out);
  const auto& r = prepared.exclusion;
  out << "prep: excluded " << r.excluded_count << " of " << r.input_count << " candidates ("
      << format_double(100.0 * r.excluded_share_count) << "% of turbines, "
      << format_double(100.0 * r.excluded_share_capacity) << "% of capacity) -> " << o.out << "\n";
  return kExitOk;
}

int run_scale(const Options& o, std::ostream& out) {
  RunManifest manifest("scale");
  const Instance inst = load(o, manifest);
  const fs::path parent = output_parent(o.out);
  prepare_output_dir(parent, {o.instance});
  const auto scaled = manifest.stage("scale", [&] { return scale_criteria(inst); });
  for (Criterion c : kAllCriteria) {
    if (scaled.scaling[static_cast<int>(c)].degenerate) manifest.warn("criterion " + to_string(c) + " is constant");
  }
  write_text_file(o.out, histogram_csv(scaled, o.bins));
  manifest.set_config({{"bins", o.bins}, {"target_mean", scaled.target_mean}});
  manifest.write(parent);
  out << "scale: histogram of " << inst.candidates.size() << " sites -> " << o.out << "\n";
  return kExitOk;
}

int run_solve(const Options& o, std::ostream& out) {
  RunManifest manifest("solve");
  const Instance inst = load(o, manifest);
  const ScenarioConfig config = parse_scenario_json(read_text_file(o.scenario));
  manifest.add_input(o.scenario);
  prepare_output_dir(o.out, {o.instance});
  const auto problem = scenario_constraints(inst, config, o.scale);
  const Selection sel =
      manifest.stage("solve", [&] { return solve(inst, config.weights, problem.constraints); });
  const auto equity = regional_equity(inst, sel.decision);
  const auto south = south_quota(inst, sel.decision);
  manifest.stage("write", [&] {
    const fs::path dir = o.out;
    write_text_file(dir / "selection.csv", selection_csv(inst, sel));
    write_geojson(dir / "selection.geojson", inst, sel);
    json summary = summary_json(sel);
    summary["scenario"] = config.name;
    summary["total_target_mw"] = problem.total_target_mw;
    summary["added_target_mw"] = problem.constraints.cap_obj_mw;
    summary["regional_equity_pct"] = equity.regional_equity_pct;
    summary["south_quota_pct"] = south.pct;
    write_text_file(dir / "summary.json", dump_json(summary));
    return 0;
  });
  if (!(sel.gap < 0.05)) manifest.warn("optimality gap " + num(sel.gap) + " exceeds 5%");
  manifest.set_config({{"scenario", json::parse(scenario_to_json(config))}, {"scale", o.scale}});
  manifest.write(o.out);
  out << "solve: " << config.name << ": " << sel.count() << " sites, " << format_double(sel.capacity_mw)
      << " MW, objective " << format_double(sel.objective) << ", gap " << num(sel.gap) << " -> " << o.out << "\n";
  return kExitOk;
}

int run_sweep(const Options& o, std::ostream& out) {
  RunManifest manifest("sweep");
  const Instance inst = load(o, manifest);
  prepare_output_dir(o.out, {o.instance});
  SweepSpec spec;
  spec.optimize = parse_criterion(o.optimize);
  spec.sweep = parse_criterion(o.sweep);
  spec.steps = o.steps;
  spec.step_factor = o.factor;
  ScenarioConfig config;
  config.name = "sweep";
  config.weights = {1.0, 0.0, 0.0};
  config.equity = o.equity;
  config.total_capacity_mw = o.total_mw;
  const auto problem = scenario_constraints(inst, config, o.scale);
  const ParetoFront front = manifest.stage(
      "sweep", [&] { return pareto_sweep(inst, spec, problem.constraints, {}, worker_count()); });
  if (front.terminated_early) manifest.warn("front terminated early: " + front.termination_reason);
  write_text_file(fs::path(o.out) / "front.csv", front_csv(front));
  manifest.set_config({{"optimize", to_string(spec.optimize)},
                       {"sweep", to_string(spec.sweep)},
                       {"steps", spec.steps},
                       {"factor", spec.step_factor},
                       {"equity", o.equity},
                       {"total_capacity_mw", o.total_mw},
                       {"scale", o.scale}});
  manifest.write(o.out);
  out << "sweep: " << front.points.size() << " points" << (front.terminated_early ? " (terminated early)" : "")
      << " -> " << o.out << "\n";
  return kExitOk;
}

int run_scenarios(const Options& o, std::ostream& out) {
  RunManifest manifest("scenarios");
  const Instance inst = load(o, manifest);
  std::vector<ScenarioConfig> grid;
  if (o.grid == "builtin") {
    grid = builtin_grid();
  } else {
    grid = parse_grid_json(read_text_file(o.grid));
    manifest.add_input(o.grid);
  }
  prepare_output_dir(o.out, {o.instance});
  GridOptions options;
  options.scale = o.scale;
  options.threads = worker_count();
  const auto results = manifest.stage("grid", [&] { return run_grid(inst, grid, options); });
  manifest.stage("write", [&] {
    const fs::path dir = o.out;
    write_text_file(dir / "results.csv", results_csv(results));
    write_text_file(dir / "radar.csv", radar_csv(scenario_radar(results)));
    for (const auto& r : results) {
      if (r.ok) write_geojson(dir / (r.name + ".selection.geojson"), inst, r.selection);
    }
    return 0;
  });
  json echo = json::array();
  for (const auto& c : grid) echo.push_back(json::parse(scenario_to_json(c)));
  for (const auto& r : results) {
    manifest.record_stage("scenario " + r.name, r.runtime_s);
    if (!r.ok) manifest.warn("scenario " + r.name + " failed: " + r.error);
    else if (!(r.selection.gap < 0.05)) manifest.warn("scenario " + r.name + " gap " + num(r.selection.gap));
  }
  manifest.set_config({{"grid", echo}, {"scale", o.scale}, {"threads", options.threads}});
  manifest.write(o.out);
  std::size_t ok = 0;
  for (const auto& r : results) ok += r.ok ? 1 : 0;
  out << "scenarios: " << ok << " of " << results.size() << " solved -> " << o.out << "\n";
  return kExitOk;
}

int run_metrics(const Options& o, std::ostream& out) {
  RunManifest manifest("metrics");
  if (!fs::is_regular_file(o.selection)) throw IoError("selection file " + o.selection + " does not exist");
  const Instance inst = load(o, manifest);
  manifest.add_input(o.selection);
  const fs::path parent = output_parent(o.out);
  prepare_output_dir(parent, {o.instance});
  const auto decision = decision_from_ids(inst, read_selection_ids(o.selection));
  const auto equity = regional_equity(inst, decision, !o.exclude_existing);
  const auto stats = regional_stats(inst, decision);
  if (equity.all_zero) manifest.warn("no installed capacity: gini reported as 0");
  if (equity.excluded_zero_population > 0) {
    manifest.warn(std::to_string(equity.excluded_zero_population) + " zero-population municipalities excluded");
  }
  if (stats.south.nothing_added) manifest.warn("empty selection: south quota reported as 0");
  write_text_file(o.out, dump_json(metrics_json(equity, stats)));
  manifest.set_config({{"include_existing", !o.exclude_existing}});
  manifest.write(parent);
  out << "metrics: regional equity " << format_double(equity.regional_equity_pct) << "%, south quota "
      << format_double(stats.south.pct) << "% -> " << o.out << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Onshore wind expansion planner", args.empty() ? "plan" : args[0]};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic instance");
  synth->add_option("--spec", o.spec_file, "Synth spec JSON");
  synth->add_option("--preset", o.preset, "Built-in spec: germany-like or default");
  synth->add_option("--seed", o.seed, "Override the spec seed");
  synth->add_option("--out", o.out, "Output directory")->required();

  auto* prep = app.add_subcommand("prep", "Exclusion buffers and network lengths");
  prep->add_option("--instance", o.instance, "Instance directory")->required();
  prep->add_option("--buffer-m", o.buffer_m, "Buffer diameter in metres")->capture_default_str();
  prep->add_option("--out", o.out, "Output directory")->required();

  auto* scale = app.add_subcommand("scale", "Scaled-value histogram");
  scale->add_option("--instance", o.instance, "Prepared instance directory")->required();
  scale->add_option("--out", o.out, "Histogram CSV")->required();
  scale->add_option("--bins", o.bins, "Bins per criterion")->capture_default_str()->check(CLI::PositiveNumber);

  auto* solve_cmd = app.add_subcommand("solve", "Solve one scenario");
  solve_cmd->add_option("--instance", o.instance, "Prepared instance directory")->required();
  solve_cmd->add_option("--scenario", o.scenario, "Scenario JSON")->required();
  solve_cmd->add_option("--scale", o.scale, "Multiplier on the total capacity target")->capture_default_str();
  solve_cmd->add_option("--out", o.out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Epsilon-constraint Pareto front");
  sweep->add_option("--instance", o.instance, "Prepared instance directory")->required();
  sweep->add_option("--optimize", o.optimize, "Minimized criterion")->capture_default_str();
  sweep->add_option("--sweep", o.sweep, "Capped criterion")->capture_default_str();
  sweep->add_option("--steps", o.steps, "Front points")->capture_default_str();
  sweep->add_option("--factor", o.factor, "Cap multiplier per step")->capture_default_str();
  sweep->add_flag("--equity", o.equity, "Apply equity floors");
  sweep->add_option("--total-mw", o.total_mw, "Total capacity target (MW)")->capture_default_str();
  sweep->add_option("--scale", o.scale, "Multiplier on the total capacity target")->capture_default_str();
  sweep->add_option("--out", o.out, "Output directory")->required();

  auto* scen = app.add_subcommand("scenarios", "Run a scenario grid");
  scen->add_option("--instance", o.instance, "Prepared instance directory")->required();
  scen->add_option("--grid", o.grid, "builtin or a grid JSON file")->capture_default_str();
  scen->add_option("--scale", o.scale, "Multiplier on total capacity targets")->capture_default_str();
  scen->add_option("--out", o.out, "Output directory")->required();

  auto* metrics = app.add_subcommand("metrics", "Equity and regional statistics of a selection");
  metrics->add_option("--selection", o.selection, "selection.csv")->required();
  metrics->add_option("--instance", o.instance, "Instance directory")->required();
  metrics->add_option("--out", o.out, "metrics.json")->required();
  metrics->add_flag("--exclude-existing", o.exclude_existing, "Leave existing turbines out of the equity index");

  std::vector<const char*> argv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"plan"} : args;
  for (const auto& a : storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (synth->parsed()) return run_synth(o, out);
    if (prep->parsed()) return run_prep(o, out);
    if (scale->parsed()) return run_scale(o, out);
    if (solve_cmd->parsed()) return run_solve(o, out);
    if (sweep->parsed()) return run_sweep(o, out);
    if (scen->parsed()) return run_scenarios(o, out);
    if (metrics->parsed()) return run_metrics(o, out);
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace windplan
