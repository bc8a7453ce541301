// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "test_support.hpp"
#include "windplan/cli.hpp"
#include "windplan/csv_io.hpp"
#include "windplan/errors.hpp"
#include "windplan/geoprep.hpp"
#include "windplan/metrics.hpp"
#include "windplan/objective.hpp"
#include "windplan/pareto.hpp"
#include "windplan/scenarios.hpp"
#include "windplan/synth.hpp"

using namespace windplan;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << " :: " << o.detail << std::endl;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

Weights single(Criterion c) {
  Weights w;
  if (c == Criterion::Lcoe) w.lcoe = 1;
  if (c == Criterion::Scenicness) w.scenicness = 1;
  if (c == Criterion::NetworkLength) w.network_length = 1;
  return w;
}

double potential_of(const Instance& inst) {
  double p = 0.0;
  for (const auto& c : inst.candidates) p += c.capacity_mw;
  return p;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int compared = 0, infeasible_agree = 0, feasible = 0;
  double worst = 0.0;
  std::string problem;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    testkit::RandomInstanceOptions o;
    o.sites = 6 + trial % 13;
    o.municipalities = 1 + trial % 4;
    const Instance inst = testkit::random_instance(rng, o);
    Weights w;
    switch (trial % 4) {
      case 0: w = single(kAllCriteria[trial / 4 % 3]); break;
      case 1: w = {1, 1, 1}; break;
      default: w = {0.05 + 0.95 * u(rng), u(rng), u(rng)}; break;
    }
    Constraints c;
    c.cap_obj_mw = (0.25 + 0.5 * u(rng)) * potential_of(inst);
    if (trial % 3 == 1) {
      for (const auto& [id, p] : municipal_potentials(inst)) c.equity_floors[id] = (0.1 + 0.3 * u(rng)) * p;
    }
    if (trial % 3 != 0) {
      try {
        const auto free = brute_force(inst, w, c);
        const Criterion k = kAllCriteria[trial % 3];
        c.set_cap(k, free.totals.of(k) * (0.8 + 0.15 * u(rng)));
      } catch (const InfeasibleError&) {
      }
    }
    Selection oracle;
    bool oracle_ok = true;
    try {
      oracle = brute_force(inst, w, c);
    } catch (const InfeasibleError&) {
      oracle_ok = false;
    }
    Selection got;
    bool got_ok = true;
    try {
      got = solve(inst, w, c);
    } catch (const InfeasibleError&) {
      got_ok = false;
    }
    if (!oracle_ok) {
      if (got_ok) problem = "trial " + std::to_string(trial) + ": solver found a selection the oracle rejects";
      else ++infeasible_agree;
      continue;
    }
    ++compared;
    if (!got_ok) {
      problem = "trial " + std::to_string(trial) + ": solver reported infeasible";
      continue;
    }
    std::string why;
    if (testkit::independently_feasible(inst, got.decision, c, &why)) ++feasible;
    else problem = "trial " + std::to_string(trial) + ": " + why;
    const double rel = (got.objective - oracle.objective) / std::max(1e-12, std::abs(oracle.objective));
    worst = std::max(worst, rel);
    if (rel > 0.02) problem = "trial " + std::to_string(trial) + ": gap to optimum " + fmt(rel);
    if (got.lower_bound > oracle.objective * (1 + 1e-9) + 1e-9) {
      problem = "trial " + std::to_string(trial) + ": lower bound above optimum";
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) problem = "runtime " + fmt(elapsed) + " s";
  return {problem.empty() && feasible == compared,
          std::to_string(compared) + " feasible instances compared, " + std::to_string(infeasible_agree) +
              " infeasible agreed, worst rel. excess " + fmt(worst) + ", feasible " + std::to_string(feasible) +
              "/" + std::to_string(compared) + ", " + fmt(elapsed, 3) + " s" +
              (problem.empty() ? "" : "; " + problem)};
}

Instance one_site_per_municipality(const std::vector<double>& capacity) {
  Instance inst;
  for (std::size_t j = 0; j < capacity.size(); ++j) {
    Municipality m;
    m.municipality_id = static_cast<MunicipalityId>(j + 1);
    m.population = 1000;
    m.area_km2 = 10;
    m.state_id = 1;
    inst.municipalities.push_back(m);
    CandidateSite c;
    c.site_id = static_cast<SiteId>(j + 1);
    c.municipality_id = m.municipality_id;
    c.capacity_mw = capacity[j] > 0 ? capacity[j] : 1.0;
    c.lcoe_ct_kwh = 5;
    c.scenicness = 3;
    c.network_length_km = 1;
    inst.candidates.push_back(c);
  }
  return inst;
}

Outcome closed_form_gini() {
  struct Case {
    std::vector<double> cap;
    double expect;
  };
  const Case cases[] = {{{2, 2, 2, 2}, 100.0}, {{0, 3}, 50.0}, {{0, 0, 5, 0}, 25.0}};
  std::string detail;
  bool pass = true;
  for (const auto& c : cases) {
    std::vector<std::uint8_t> d;
    for (double v : c.cap) d.push_back(v > 0);
    const double got = regional_equity(one_site_per_municipality(c.cap), d).regional_equity_pct;
    pass = pass && std::abs(got - c.expect) <= 1e-12;
    detail += fmt(got, 17) + "% (expect " + fmt(c.expect) + ") ";
  }
  return {pass, detail};
}

struct GridRun {
  std::vector<ScenarioResult> rows;
  double grid_s = 0.0;
  double setup_s = 0.0;
  std::size_t threads = 1;
  std::size_t sites = 0;
};

const GridRun& germany_grid() {
  static const GridRun run = [] {
    GridRun g;
    const auto t0 = Clock::now();
    const SynthSpec spec = parse_synth_spec(read_text_file(std::string(WINDPLAN_DATA_DIR) + "/germany_like.json"));
    const Instance inst = geoprep::prepare(generate(spec)).instance;
    g.setup_s = seconds_since(t0);
    g.sites = inst.candidates.size();
    GridOptions opt;
    opt.scale = 0.01;
    g.threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 4);
    opt.threads = g.threads;
    const auto t1 = Clock::now();
    g.rows = run_grid(inst, builtin_grid(), opt);
    g.grid_s = seconds_since(t1);
    return g;
  }();
  return run;
}

Outcome equity_dominance() {
  const auto& g = germany_grid();
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k + 1 < g.rows.size(); k += 2) {
    const auto& plain = g.rows[k];
    const auto& eq = g.rows[k + 1];
    if (!plain.ok || !eq.ok) return {false, plain.name + ": " + plain.error + eq.error};
    const bool ok = eq.equity_pct >= plain.equity_pct;
    pass = pass && ok;
    detail += plain.name + " " + fmt(plain.equity_pct) + "% -> " + fmt(eq.equity_pct) + "%" + (ok ? "" : " (!)") + "; ";
  }
  return {pass, detail};
}

Outcome diagonal_dominance() {
  const auto& g = germany_grid();
  const std::pair<const char*, Criterion> diag[] = {
      {"Base_LCOE", Criterion::Lcoe}, {"Base_Scenic", Criterion::Scenicness}, {"Base_Network", Criterion::NetworkLength},
      {"High_LCOE", Criterion::Lcoe}, {"High_Scenic", Criterion::Scenicness}, {"High_Network", Criterion::NetworkLength}};
  bool pass = true;
  std::string detail;
  for (const auto& [name, c] : diag) {
    const auto it = std::find_if(g.rows.begin(), g.rows.end(), [&](const ScenarioResult& r) { return r.name == name; });
    if (it == g.rows.end() || !it->ok) return {false, std::string(name) + " missing or failed"};
    // Minima are compared among scenarios sharing the capacity target.
    double lowest = it->selection.means.of(c);
    for (const auto& r : g.rows) {
      if (r.ok && r.config.total_capacity_mw == it->config.total_capacity_mw) {
        lowest = std::min(lowest, r.selection.means.of(c));
      }
    }
    const double mine = it->selection.means.of(c);
    const bool ok = mine <= lowest * (1.0 + it->selection.gap) + 1e-9;
    pass = pass && ok;
    detail += std::string(name) + " " + fmt(mine) + " vs min " + fmt(lowest) + (ok ? "" : " (!)") + "; ";
  }
  return {pass, detail};
}

Outcome pareto_monotonicity() {
  std::mt19937_64 rng(77);
  std::size_t fronts = 0, points = 0;
  std::string problem;
  const Criterion pairs[][2] = {{Criterion::Lcoe, Criterion::Scenicness},
                                {Criterion::Lcoe, Criterion::NetworkLength},
                                {Criterion::Scenicness, Criterion::Lcoe},
                                {Criterion::NetworkLength, Criterion::Scenicness}};
  auto check_front = [&](const Instance& inst, const Constraints& base, const SweepSpec& spec, bool oracle) {
    const auto front = pareto_sweep(inst, spec, base, {}, 2);
    ++fronts;
    for (std::size_t k = 0; k < front.points.size(); ++k) {
      const auto& p = front.points[k];
      ++points;
      if (k > 0 && p.achieved_min < front.points[k - 1].achieved_min) {
        problem = "front " + std::to_string(fronts) + " decreases at step " + std::to_string(k);
      }
      if (!oracle) continue;
      Constraints c = base;
      if (p.step > 0) c.set_cap(spec.sweep, p.cap);
      const auto bf = brute_force(inst, single(spec.optimize), c);
      if (std::abs(bf.objective - p.achieved_min) > 1e-9 * std::max(1.0, bf.objective)) {
        problem = "front " + std::to_string(fronts) + " step " + std::to_string(k) + ": " + fmt(p.achieved_min, 10) +
                  " vs optimum " + fmt(bf.objective, 10);
      }
    }
  };
  for (int trial = 0; trial < 40; ++trial) {
    testkit::RandomInstanceOptions o;
    o.sites = 8 + trial % 8;
    o.municipalities = 1 + trial % 3;
    const Instance inst = testkit::random_instance(rng, o);
    Constraints base;
    base.cap_obj_mw = 0.4 * potential_of(inst);
    if (trial % 2) {
      for (const auto& [id, p] : municipal_potentials(inst)) base.equity_floors[id] = 0.15 * p;
    }
    SweepSpec spec;
    spec.optimize = pairs[trial % 4][0];
    spec.sweep = pairs[trial % 4][1];
    spec.steps = 15;
    check_front(inst, base, spec, true);
  }
  SynthSpec s;
  s.seed = 12;
  const Instance big = geoprep::prepare(generate(s)).instance;
  for (const auto& pair : pairs) {
    Constraints base;
    base.cap_obj_mw = 0.2 * potential_of(big);
    SweepSpec spec;
    spec.optimize = pair[0];
    spec.sweep = pair[1];
    check_front(big, base, spec, false);
  }
  return {problem.empty(), std::to_string(fronts) + " fronts, " + std::to_string(points) + " points" +
                               (problem.empty() ? "" : "; " + problem)};
}

Outcome floor_construction() {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t checked = 0, in_range = 0, clamped_low = 0, clamped_high = 0;
  std::string problem;
  for (int trial = 0; trial < 500; ++trial) {
    testkit::RandomInstanceOptions o;
    o.sites = 10 + trial % 40;
    o.municipalities = 1 + trial % 9;
    o.existing = trial % 6;
    Instance inst = testkit::random_instance(rng, o);
    if (trial % 7 == 0 && inst.municipalities.size() > 1) inst.municipalities[0].population = 0;
    const auto potentials = municipal_potentials(inst);
    double existing = 0.0;
    for (const auto& m : inst.municipalities) existing += m.existing_capacity_mw;
    const double total = existing + u(rng) * 1.5 * potential_of(inst);
    const auto floors = equity_floors(inst.municipalities, total, potentials);
    double pop = 0.0;
    for (const auto& m : inst.municipalities) pop += m.population;
    for (const auto& m : inst.municipalities) {
      ++checked;
      const double pot = potentials.contains(m.municipality_id) ? potentials.at(m.municipality_id) : 0.0;
      const double f = floors.contains(m.municipality_id) ? floors.at(m.municipality_id) : 0.0;
      const double raw = pop > 0 ? m.population / pop * total - m.existing_capacity_mw : 0.0;
      const double tol = 1e-9 * std::max(1.0, total);
      if (f < 0.0 || f > pot + tol) problem = "floor outside [0, potential]";
      if (raw >= 0.0 && raw <= pot) {
        ++in_range;
        if (std::abs(f - raw) > tol) problem = "in-range floor differs from population share";
      } else if (raw < 0.0) {
        ++clamped_low;
        if (f != 0.0) problem = "negative share not clamped to 0";
      } else {
        ++clamped_high;
        if (std::abs(f - pot) > tol) problem = "share above potential not clamped";
      }
    }
  }
  return {problem.empty(), std::to_string(checked) + " municipalities: " + std::to_string(in_range) + " in range, " +
                               std::to_string(clamped_low) + " clamped to 0, " + std::to_string(clamped_high) +
                               " clamped to potential" + (problem.empty() ? "" : "; " + problem)};
}

Outcome geoprep_exactness() {
  std::mt19937_64 rng(99);
  std::size_t queries = 0;
  std::string problem;
  for (int trial = 0; trial < 50; ++trial) {
    const double spread = 0.2 + 0.3 * (trial % 10);
    std::uniform_real_distribution<double> lat(50 - spread, 50 + spread), lon(10 - spread, 10 + spread);
    std::vector<CandidateSite> sites(200);
    for (std::size_t k = 0; k < sites.size(); ++k) {
      sites[k].site_id = static_cast<SiteId>(k + 1);
      sites[k].lat = lat(rng);
      sites[k].lon = lon(rng);
    }
    std::vector<Transformer> tr;
    for (int t = 0; t < 5 + trial * 4; ++t) tr.push_back({static_cast<TransformerId>(t * 3 + 1), lat(rng), lon(rng), 20});
    const auto got = geoprep::nearest_transformer(sites, tr);
    for (std::size_t k = 0; k < sites.size(); ++k) {
      ++queries;
      const auto ref = testkit::exhaustive_nearest(sites[k].lat, sites[k].lon, tr);
      if (got[k].transformer_id != ref.id || got[k].network_length_km != ref.km) {
        problem = "mismatch on instance " + std::to_string(trial);
      }
    }
  }
  const double one_degree = geoprep::haversine_km({0, 0}, {0, 1});
  if (std::abs(one_degree - 111.195) > 0.001) problem = "haversine " + fmt(one_degree, 10);
  std::vector<CandidateSite> sites(2000);
  std::uniform_real_distribution<double> lat(49.9, 50.1), lon(9.9, 10.1);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    sites[k].site_id = static_cast<SiteId>(k + 1);
    sites[k].lat = lat(rng);
    sites[k].lon = lon(rng);
    sites[k].capacity_mw = 1;
  }
  std::vector<ExistingTurbine> existing;
  for (int t = 0; t < 60; ++t) existing.push_back({t + 1, 1, lat(rng), lon(rng), 2});
  std::size_t previous = sites.size();
  for (double d = 50; d <= 8000; d += 50) {
    const std::size_t kept = geoprep::exclusion_filter(sites, existing, d).kept.size();
    if (kept > previous) problem = "exclusion not monotone at " + fmt(d) + " m";
    previous = kept;
  }
  return {problem.empty(), std::to_string(queries) + " nearest queries exact, 1 deg = " + fmt(one_degree, 8) +
                               " km, 160 buffer diameters monotone" + (problem.empty() ? "" : "; " + problem)};
}

Outcome scaling_contract() {
  std::mt19937_64 rng(4242);
  std::string problem;
  double worst_mean = 0.0;
  auto argsort = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
  };
  for (int trial = 0; trial < 200; ++trial) {
    testkit::RandomInstanceOptions o;
    o.sites = 3 + trial * 5;
    const Instance inst = testkit::random_instance(rng, o);
    const auto scaled = scale_criteria(inst);
    for (Criterion c : kAllCriteria) {
      std::vector<double> raw;
      for (const auto& s : inst.candidates) raw.push_back(criterion_value(s, c));
      const auto mm = minmax_scale(raw);
      if (*std::min_element(mm.values.begin(), mm.values.end()) != 0.0 ||
          *std::max_element(mm.values.begin(), mm.values.end()) != 1.0) {
        problem = "min-max endpoints";
      }
      const auto& v = scaled.of(c);
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      worst_mean = std::max(worst_mean, std::abs(mean - 1.0));
      if (std::abs(mean - 1.0) > 1e-9) problem = "mean " + fmt(mean, 17);
      if (argsort(raw) != argsort(v)) problem = "ranking changed";
    }
  }
  return {problem.empty(), "200 instances x 3 criteria, worst |mean - 1| = " + fmt(worst_mean, 3) +
                               (problem.empty() ? "" : "; " + problem)};
}

Outcome desk_performance() {
  const auto& g = germany_grid();
  double worst_gap = 0.0;
  std::string problem;
  for (const auto& r : g.rows) {
    if (!r.ok) {
      problem = r.name + " failed: " + r.error;
      continue;
    }
    worst_gap = std::max(worst_gap, r.selection.gap);
    if (!(r.selection.gap < 0.05)) problem = r.name + " gap " + fmt(r.selection.gap);
  }
  if (g.grid_s >= 120.0) problem = "grid took " + fmt(g.grid_s) + " s";
  return {problem.empty(), std::to_string(g.rows.size()) + " scenarios on " + std::to_string(g.sites) +
                               " sites in " + fmt(g.grid_s) + " s (" + std::to_string(g.threads) +
                               " threads; generation and prep " + fmt(g.setup_s) + " s), worst gap " +
                               fmt(worst_gap) + (problem.empty() ? "" : "; " + problem)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") {
      files[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
    }
  }
  return files;
}

Outcome determinism() {
  std::map<std::string, std::string> runs[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path root = testkit::fresh_dir("acceptance_det_" + std::to_string(k));
    write_text_file(root / "scenario.json",
                    R"({"name":"Base_all_E","w_c":1,"w_s":1,"w_l":1,"equity":true,"total_capacity_mw":105000})");
    const std::string r = root.string();
    const std::vector<std::vector<std::string>> steps = {
        {"synth", "--preset", "default", "--seed", "7", "--out", r + "/raw"},
        {"prep", "--instance", r + "/raw", "--out", r + "/prep"},
        {"scale", "--instance", r + "/prep", "--out", r + "/scale/hist.csv"},
        {"solve", "--instance", r + "/prep", "--scenario", r + "/scenario.json", "--scale", "0.002", "--out",
         r + "/solve"},
        {"sweep", "--instance", r + "/prep", "--scale", "0.002", "--steps", "5", "--out", r + "/sweep"},
        {"scenarios", "--instance", r + "/prep", "--scale", "0.002", "--out", r + "/grid"},
        {"metrics", "--selection", r + "/solve/selection.csv", "--instance", r + "/prep", "--out",
         r + "/metrics/metrics.json"}};
    for (auto args : steps) {
      args.insert(args.begin(), "plan");
      std::ostringstream out, err;
      const int code = dispatch(args, out, err);
      if (code != 0) return {false, args[1] + " exited " + std::to_string(code) + ": " + err.str()};
    }
    runs[k] = snapshot(root);
    fs::remove_all(root);
  }
  std::string diff;
  for (const auto& [name, content] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != content) diff += name + " ";
  }
  if (runs[0].size() != runs[1].size()) diff += "(file sets differ)";
  return {diff.empty(), std::to_string(runs[0].size()) + " output files compared" +
                            (diff.empty() ? ", all byte-identical" : "; differing: " + diff)};
}

}  // namespace

int main() {
  report(1, "oracle equivalence", oracle_equivalence);
  report(2, "closed-form Gini", closed_form_gini);
  report(3, "equity dominance", equity_dominance);
  report(4, "diagonal dominance", diagonal_dominance);
  report(5, "Pareto monotonicity", pareto_monotonicity);
  report(6, "equity-floor construction", floor_construction);
  report(7, "geoprep exactness", geoprep_exactness);
  report(8, "scaling contract", scaling_contract);
  report(9, "desk-scale performance", desk_performance);
  report(10, "determinism", determinism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
