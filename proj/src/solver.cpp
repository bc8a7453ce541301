#include "windplan/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "windplan/errors.hpp"

namespace windplan {

bool Constraints::has_caps() const {
  return std::any_of(max_total.begin(), max_total.end(), [](const auto& c) { return c.has_value(); });
}

double CriterionTotals::of(Criterion c) const {
  switch (c) {
    case Criterion::Lcoe: return lcoe;
    case Criterion::Scenicness: return scenicness;
    case Criterion::NetworkLength: return network_length_km;
  }
  return 0.0;
}

MwTable equity_floors(const std::vector<Municipality>& municipalities, double total_target_mw,
                      const MwTable& potentials) {
  double pop_total = 0.0;
  for (const auto& m : municipalities) pop_total += m.population;
  if (!(pop_total > 0.0)) throw ValidationError("equity floors need a positive total population");
  MwTable floors;
  for (const auto& m : municipalities) {
    auto it = potentials.find(m.municipality_id);
    const double potential = it == potentials.end() ? 0.0 : it->second;
    const double share_target = m.population / pop_total * total_target_mw - m.existing_capacity_mw;
    floors[m.municipality_id] = std::clamp(share_target, 0.0, std::max(0.0, potential));
  }
  return floors;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Strict improvement that does not depend on the magnitude of the costs.
bool improves(double candidate, double current) { return candidate < current - 1e-12 * std::abs(current); }

struct CapLimit {
  int criterion;
  double limit;
  double slack;
};

// The instance in solver form: sites renumbered by ascending site_id so that
// every "lowest index" tie-break is a lowest-site_id tie-break.
struct Problem {
  std::size_t n = 0;
  std::vector<std::size_t> to_instance;
  std::vector<double> cap;
  std::vector<double> cost;
  std::array<std::vector<double>, 3> crit;
  std::vector<std::uint32_t> muni;
  std::size_t n_muni = 0;
  std::vector<double> floor;
  std::vector<double> floor_slack;
  std::vector<std::vector<std::uint32_t>> sites_of_muni;
  std::vector<std::uint32_t> floored;     // municipalities with a positive floor
  std::vector<std::uint32_t> unfloored_sites;
  double target = 0.0;
  double target_slack = 0.0;
  std::vector<CapLimit> caps;
  double potential = 0.0;
};

Problem build_problem(const Instance& instance, std::span<const double> site_cost, const Constraints& constraints) {
  if (site_cost.size() != instance.candidates.size()) {
    throw ValidationError("site cost vector size does not match candidate count");
  }
  if (!(constraints.cap_obj_mw >= 0.0) || !std::isfinite(constraints.cap_obj_mw)) {
    throw ValidationError("capacity target must be >= 0");
  }
  Problem P;
  P.n = instance.candidates.size();
  P.to_instance.resize(P.n);
  std::iota(P.to_instance.begin(), P.to_instance.end(), std::size_t{0});
  std::sort(P.to_instance.begin(), P.to_instance.end(), [&](std::size_t a, std::size_t b) {
    return instance.candidates[a].site_id < instance.candidates[b].site_id;
  });

  const auto muni_index = instance.candidate_municipality_indices();
  P.n_muni = instance.municipalities.size();
  P.cap.resize(P.n);
  P.cost.resize(P.n);
  P.muni.resize(P.n);
  for (auto& v : P.crit) v.resize(P.n);
  P.sites_of_muni.assign(P.n_muni, {});
  for (std::size_t i = 0; i < P.n; ++i) {
    const std::size_t src = P.to_instance[i];
    const CandidateSite& site = instance.candidates[src];
    P.cap[i] = site.capacity_mw;
    P.cost[i] = site_cost[src];
    if (!(P.cost[i] >= 0.0) || !std::isfinite(P.cost[i])) {
      throw ValidationError("site " + std::to_string(site.site_id) + " has a negative or non-finite cost");
    }
    for (Criterion c : kAllCriteria) P.crit[static_cast<int>(c)][i] = criterion_value(site, c);
    P.muni[i] = static_cast<std::uint32_t>(muni_index[src]);
    P.sites_of_muni[P.muni[i]].push_back(static_cast<std::uint32_t>(i));
    P.potential += P.cap[i];
  }

  std::vector<double> muni_potential(P.n_muni, 0.0);
  for (std::size_t i = 0; i < P.n; ++i) muni_potential[P.muni[i]] += P.cap[i];

  std::unordered_map<MunicipalityId, std::uint32_t> lookup;
  lookup.reserve(P.n_muni);
  for (std::size_t k = 0; k < P.n_muni; ++k) {
    lookup.emplace(instance.municipalities[k].municipality_id, static_cast<std::uint32_t>(k));
  }
  P.floor.assign(P.n_muni, 0.0);
  P.floor_slack.assign(P.n_muni, 0.0);
  for (const auto& [id, mw] : constraints.equity_floors) {
    auto it = lookup.find(id);
    if (it == lookup.end()) throw ValidationError("equity floor for unknown municipality_id " + std::to_string(id));
    if (!(mw >= 0.0) || !std::isfinite(mw)) {
      throw ValidationError("equity floor for municipality " + std::to_string(id) + " must be >= 0");
    }
    if (mw > muni_potential[it->second] + feasibility_slack(muni_potential[it->second])) {
      throw ValidationError("equity floor for municipality " + std::to_string(id) + " exceeds its potential");
    }
    P.floor[it->second] = mw;
    P.floor_slack[it->second] = feasibility_slack(mw);
  }
  std::vector<char> is_floored(P.n_muni, 0);
  for (std::uint32_t j = 0; j < P.n_muni; ++j) {
    if (P.floor[j] > P.floor_slack[j]) {
      P.floored.push_back(j);
      is_floored[j] = 1;
    }
  }
  for (std::uint32_t i = 0; i < P.n; ++i) {
    if (!is_floored[P.muni[i]]) P.unfloored_sites.push_back(i);
  }

  P.target = constraints.cap_obj_mw;
  P.target_slack = feasibility_slack(P.target);
  for (Criterion c : kAllCriteria) {
    if (const auto& cap = constraints.cap(c)) {
      if (!(*cap >= 0.0) || !std::isfinite(*cap)) throw ValidationError("cap on " + to_string(c) + " must be >= 0");
      P.caps.push_back({static_cast<int>(c), *cap, feasibility_slack(*cap)});
    }
  }
  return P;
}

void require_potential(const Problem& P) {
  if (P.potential < P.target - P.target_slack) {
    throw InfeasibleError("capacity target " + std::to_string(P.target) + " MW exceeds total potential " +
                          std::to_string(P.potential) + " MW (shortfall " + std::to_string(P.target - P.potential) +
                          " MW)");
  }
}

struct State {
  std::vector<std::uint8_t> x;
  double nat = 0.0;
  std::vector<double> mt;
  std::array<double, 3> tot{};
};

State empty_state(const Problem& P) {
  State s;
  s.x.assign(P.n, 0);
  s.mt.assign(P.n_muni, 0.0);
  return s;
}

void add_site(const Problem& P, State& s, std::uint32_t i) {
  s.x[i] = 1;
  s.nat += P.cap[i];
  s.mt[P.muni[i]] += P.cap[i];
  for (int k = 0; k < 3; ++k) s.tot[k] += P.crit[k][i];
}

void remove_site(const Problem& P, State& s, std::uint32_t i) {
  s.x[i] = 0;
  s.nat -= P.cap[i];
  s.mt[P.muni[i]] -= P.cap[i];
  for (int k = 0; k < 3; ++k) s.tot[k] -= P.crit[k][i];
}

// Canonical (ascending site_id) recomputation, removes drift from incremental updates.
void recompute(const Problem& P, State& s) {
  s.nat = 0.0;
  std::fill(s.mt.begin(), s.mt.end(), 0.0);
  s.tot = {};
  for (std::uint32_t i = 0; i < P.n; ++i) {
    if (!s.x[i]) continue;
    s.nat += P.cap[i];
    s.mt[P.muni[i]] += P.cap[i];
    for (int k = 0; k < 3; ++k) s.tot[k] += P.crit[k][i];
  }
}

bool capacity_ok(const Problem& P, const State& s) { return s.nat >= P.target - P.target_slack; }

bool floors_ok(const Problem& P, const State& s) {
  return std::all_of(P.floored.begin(), P.floored.end(),
                     [&](std::uint32_t j) { return s.mt[j] >= P.floor[j] - P.floor_slack[j]; });
}

bool cap_ok(const State& s, const CapLimit& c) { return s.tot[c.criterion] <= c.limit + c.slack; }

bool caps_ok(const Problem& P, const State& s) {
  return std::all_of(P.caps.begin(), P.caps.end(), [&](const CapLimit& c) { return cap_ok(s, c); });
}

bool feasible(const Problem& P, const State& s) { return capacity_ok(P, s) && floors_ok(P, s) && caps_ok(P, s); }

double state_cost(const Problem& P, std::span<const double> value, const State& s) {
  double total = 0.0;
  for (std::uint32_t i = 0; i < P.n; ++i) {
    if (s.x[i]) total += value[i];
  }
  return total;
}

// Sites ordered by capacity with a min-tree over per-site values; answers
// "cheapest eligible site with capacity >= need" in O(log n).
class CapacityIndex {
 public:
  explicit CapacityIndex(const Problem& P) : order_(P.n), pos_(P.n), sorted_cap_(P.n) {
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) {
      return P.cap[a] != P.cap[b] ? P.cap[a] < P.cap[b] : a < b;
    });
    for (std::uint32_t p = 0; p < P.n; ++p) {
      pos_[order_[p]] = p;
      sorted_cap_[p] = P.cap[order_[p]];
    }
  }

  std::uint32_t position(std::uint32_t site) const { return pos_[site]; }
  std::uint32_t first_with_capacity(double need) const {
    return static_cast<std::uint32_t>(std::lower_bound(sorted_cap_.begin(), sorted_cap_.end(), need) -
                                      sorted_cap_.begin());
  }
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> pos_;
  std::vector<double> sorted_cap_;
};

class MinTree {
 public:
  explicit MinTree(std::size_t n) {
    size_ = 1;
    while (size_ < std::max<std::size_t>(n, 1)) size_ <<= 1;
    node_.assign(2 * size_, {kInf, kNone});
  }

  void set(std::size_t pos, double value, std::uint32_t key) {
    std::size_t k = pos + size_;
    node_[k] = {value, key};
    for (k >>= 1; k >= 1; k >>= 1) node_[k] = std::min(node_[2 * k], node_[2 * k + 1]);
  }

  // Minimum (value, key) over positions [from, size).
  std::pair<double, std::uint32_t> suffix_min(std::size_t from) const {
    std::pair<double, std::uint32_t> best{kInf, kNone};
    std::size_t lo = from + size_, hi = 2 * size_;
    while (lo < hi) {
      if (lo & 1) best = std::min(best, node_[lo++]);
      if (hi & 1) best = std::min(best, node_[--hi]);
      lo >>= 1;
      hi >>= 1;
    }
    return best;
  }

 private:
  std::size_t size_;
  std::vector<std::pair<double, std::uint32_t>> node_;
};

std::vector<std::uint32_t> ratio_order(const Problem& P, std::span<const double> value,
                                       std::vector<std::uint32_t> sites) {
  std::sort(sites.begin(), sites.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double ra = value[a] / P.cap[a];
    const double rb = value[b] / P.cap[b];
    return ra != rb ? ra < rb : a < b;
  });
  return sites;
}

// Floors first (per municipality), then the national residual, both by value per MW.
State construct(const Problem& P, std::span<const double> value) {
  State s = empty_state(P);
  for (std::uint32_t j : P.floored) {
    for (std::uint32_t i : ratio_order(P, value, P.sites_of_muni[j])) {
      if (s.mt[j] >= P.floor[j] - P.floor_slack[j]) break;
      add_site(P, s, i);
    }
  }
  if (!capacity_ok(P, s)) {
    std::vector<std::uint32_t> all(P.n);
    std::iota(all.begin(), all.end(), 0u);
    for (std::uint32_t i : ratio_order(P, value, std::move(all))) {
      if (capacity_ok(P, s)) break;
      if (!s.x[i]) add_site(P, s, i);
    }
  }
  return s;
}

// Drop and single-swap moves under the capacity and floor constraints until
// no move strictly lowers the summed `value`. Caps are not enforced here.
std::size_t local_search(const Problem& P, const CapacityIndex& index, std::span<const double> value, State& s) {
  MinTree tree(P.n);
  for (std::uint32_t i = 0; i < P.n; ++i) {
    if (!s.x[i]) tree.set(index.position(i), value[i], i);
  }
  std::size_t moves = 0;
  std::vector<std::uint32_t> installed;
  for (int pass = 0; pass < 100000; ++pass) {
    bool moved = false;
    installed.clear();
    for (std::uint32_t i = 0; i < P.n; ++i) {
      if (s.x[i]) installed.push_back(i);
    }
    std::sort(installed.begin(), installed.end(), [&](std::uint32_t a, std::uint32_t b) {
      return value[a] != value[b] ? value[a] > value[b] : a < b;
    });
    for (std::uint32_t i : installed) {
      if (!s.x[i] || !(value[i] > 0.0)) continue;
      const std::uint32_t j = P.muni[i];
      const double need_nat = P.target - (s.nat - P.cap[i]);
      const bool muni_binding = P.floor[j] > P.floor_slack[j] && P.floor[j] - (s.mt[j] - P.cap[i]) > P.floor_slack[j];
      if (need_nat <= P.target_slack && !muni_binding) {
        remove_site(P, s, i);
        tree.set(index.position(i), value[i], i);
        ++moves;
        moved = true;
        continue;
      }
      std::uint32_t best = kNone;
      double best_value = value[i];
      if (muni_binding) {
        const double need_muni = P.floor[j] - (s.mt[j] - P.cap[i]);
        for (std::uint32_t u : P.sites_of_muni[j]) {
          if (s.x[u]) continue;
          if (P.cap[u] < need_nat - P.target_slack || P.cap[u] < need_muni - P.floor_slack[j]) continue;
          if (improves(value[u], best_value) || (best != kNone && value[u] == best_value && u < best)) {
            best = u;
            best_value = value[u];
          }
        }
        if (best != kNone && !improves(best_value, value[i])) best = kNone;
      } else {
        const auto [v, u] = tree.suffix_min(index.first_with_capacity(need_nat - P.target_slack));
        if (u != kNone && improves(v, value[i])) best = u;
      }
      if (best != kNone) {
        remove_site(P, s, i);
        tree.set(index.position(i), value[i], i);
        add_site(P, s, best);
        tree.set(index.position(best), kInf, kNone);
        ++moves;
        moved = true;
      }
    }
    recompute(P, s);
    if (!moved) break;
  }
  return moves;
}

// Heuristic pass for one (possibly penalized) value vector.
State heuristic(const Problem& P, const CapacityIndex& index, std::span<const double> value, bool polish,
                std::size_t& moves) {
  State s = construct(P, value);
  recompute(P, s);
  if (polish) moves += local_search(P, index, value, s);
  return s;
}

// Minimum summed value covering `residual` MW with items taken in `order`
// (ascending value per MW); exact depth-first search with a fractional bound.
// Falls back to the fractional bound when the node budget runs out.
class CoverSubproblem {
 public:
  double solve(const std::vector<double>& value, const std::vector<double>& cap, double residual, double slack) {
    value_ = &value;
    cap_ = &cap;
    slack_ = slack;
    const std::size_t m = value.size();
    suffix_min_.assign(m + 1, kInf);
    suffix_cap_.assign(m + 1, 0.0);
    for (std::size_t k = m; k-- > 0;) {
      suffix_min_[k] = std::min(suffix_min_[k + 1], value[k]);
      suffix_cap_[k] = suffix_cap_[k + 1] + cap[k];
    }
    const double root = bound(0, residual);
    if (!std::isfinite(root)) return kInf;
    best_ = kInf;
    nodes_ = 0;
    search(0, residual, 0.0);
    if (nodes_ > kNodeLimit || !std::isfinite(best_)) return root;
    return best_;
  }

 private:
  static constexpr std::size_t kNodeLimit = 20000;

  double bound(std::size_t k, double residual) const {
    if (residual <= slack_) return 0.0;
    if (suffix_cap_[k] < residual - slack_) return kInf;
    double total = 0.0;
    for (std::size_t q = k; q < value_->size(); ++q) {
      const double c = (*cap_)[q];
      if (c >= residual) return std::max(total + (*value_)[q] * (residual / c), suffix_min_[k]);
      total += (*value_)[q];
      residual -= c;
    }
    return std::max(total, suffix_min_[k]);
  }

  void search(std::size_t k, double residual, double acc) {
    if (++nodes_ > kNodeLimit) return;
    if (residual <= slack_) {
      best_ = std::min(best_, acc);
      return;
    }
    if (k == value_->size()) return;
    if (acc + bound(k, residual) >= best_) return;
    search(k + 1, residual - (*cap_)[k], acc + (*value_)[k]);
    search(k + 1, residual, acc);
  }

  const std::vector<double>* value_ = nullptr;
  const std::vector<double>* cap_ = nullptr;
  double slack_ = 0.0;
  double best_ = kInf;
  std::size_t nodes_ = 0;
  std::vector<double> suffix_min_;
  std::vector<double> suffix_cap_;
};

// Lagrangian dual of the national covering constraint with the municipal
// floor subproblems solved (near-)exactly:
//   L(mu) = constant + mu*T + sum_j min{ sum (v_i - mu cap_i) x_i : floor_j covered }.
// Every mu >= 0 gives a valid lower bound; the maximum is located by golden
// section search over [0, max v/cap]. Without floors the exact LP value is
// also taken. `value` must be nonnegative.
double lagrangian_bound(const Problem& P, std::span<const double> value, double constant) {
  std::vector<std::vector<std::uint32_t>> floored_order;
  floored_order.reserve(P.floored.size());
  for (std::uint32_t j : P.floored) floored_order.push_back(ratio_order(P, value, P.sites_of_muni[j]));

  double mu_hi = 0.0;
  for (std::uint32_t i = 0; i < P.n; ++i) mu_hi = std::max(mu_hi, value[i] / P.cap[i]);
  mu_hi = mu_hi * (1.0 + 1e-9) + 1e-300;

  CoverSubproblem cover;
  std::vector<double> sub_value, sub_cap;
  auto evaluate = [&](double mu) {
    double total = constant + mu * P.target;
    for (std::uint32_t i : P.unfloored_sites) {
      const double r = value[i] - mu * P.cap[i];
      if (r < 0.0) total += r;
    }
    for (std::size_t q = 0; q < P.floored.size(); ++q) {
      const std::uint32_t j = P.floored[q];
      const auto& order = floored_order[q];
      double covered = 0.0;
      std::size_t k = 0;
      for (; k < order.size(); ++k) {
        const double r = value[order[k]] - mu * P.cap[order[k]];
        if (r >= 0.0) break;
        total += r;
        covered += P.cap[order[k]];
      }
      const double residual = P.floor[j] - covered;
      if (residual <= P.floor_slack[j]) continue;
      sub_value.clear();
      sub_cap.clear();
      for (; k < order.size(); ++k) {
        sub_value.push_back(std::max(0.0, value[order[k]] - mu * P.cap[order[k]]));
        sub_cap.push_back(P.cap[order[k]]);
      }
      total += cover.solve(sub_value, sub_cap, residual, P.floor_slack[j]);
    }
    return total;
  };

  double best = evaluate(0.0);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = mu_hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = evaluate(c), fd = evaluate(d);
  best = std::max({best, fc, fd});
  for (int it = 0; it < 90 && b - a > 1e-15 * mu_hi; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = evaluate(c);
      best = std::max(best, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = evaluate(d);
      best = std::max(best, fd);
    }
  }

  if (P.floored.empty()) {
    // Fractional covering LP solved directly.
    std::vector<std::uint32_t> all(P.n);
    std::iota(all.begin(), all.end(), 0u);
    double residual = P.target, lp = constant;
    for (std::uint32_t i : ratio_order(P, value, std::move(all))) {
      if (residual <= P.target_slack) break;
      if (P.cap[i] >= residual) {
        lp += value[i] * (residual / P.cap[i]);
        residual = 0.0;
      } else {
        lp += value[i];
        residual -= P.cap[i];
      }
    }
    best = std::max(best, lp);
  }
  return best;
}

// Cap-respecting drop/swap polish on the true cost. Quadratic scan, so it
// is skipped when installed x candidates exceeds the pair budget.
std::size_t polish_with_caps(const Problem& P, State& s, std::size_t pair_budget) {
  std::size_t moves = 0;
  for (int pass = 0; pass < 1000; ++pass) {
    std::vector<std::uint32_t> installed;
    for (std::uint32_t i = 0; i < P.n; ++i) {
      if (s.x[i]) installed.push_back(i);
    }
    if (installed.size() * P.n > pair_budget) break;
    std::sort(installed.begin(), installed.end(), [&](std::uint32_t a, std::uint32_t b) {
      return P.cost[a] != P.cost[b] ? P.cost[a] > P.cost[b] : a < b;
    });
    bool moved = false;
    for (std::uint32_t i : installed) {
      if (!s.x[i] || !(P.cost[i] > 0.0)) continue;
      const std::uint32_t j = P.muni[i];
      const double need_nat = P.target - (s.nat - P.cap[i]);
      const bool muni_binding = P.floor[j] > P.floor_slack[j] && P.floor[j] - (s.mt[j] - P.cap[i]) > P.floor_slack[j];
      if (need_nat <= P.target_slack && !muni_binding) {
        remove_site(P, s, i);
        ++moves;
        moved = true;
        continue;
      }
      const double need_muni = muni_binding ? P.floor[j] - (s.mt[j] - P.cap[i]) : -kInf;
      std::uint32_t best = kNone;
      double best_value = P.cost[i];
      auto consider = [&](std::uint32_t u) {
        if (s.x[u]) return;
        if (P.cap[u] < need_nat - P.target_slack) return;
        if (muni_binding && (P.muni[u] != j || P.cap[u] < need_muni - P.floor_slack[j])) return;
        if (!improves(P.cost[u], best_value)) return;
        for (const CapLimit& c : P.caps) {
          if (s.tot[c.criterion] - P.crit[c.criterion][i] + P.crit[c.criterion][u] > c.limit + c.slack) return;
        }
        best = u;
        best_value = P.cost[u];
      };
      if (muni_binding) {
        for (std::uint32_t u : P.sites_of_muni[j]) consider(u);
      } else {
        for (std::uint32_t u = 0; u < P.n; ++u) consider(u);
      }
      if (best != kNone) {
        remove_site(P, s, i);
        add_site(P, s, best);
        ++moves;
        moved = true;
      }
    }
    recompute(P, s);
    if (!moved) break;
  }
  return moves;
}

// Swaps that lower a violated cap's criterion while keeping capacity, floors
// and the other caps satisfied.
void repair_caps(const Problem& P, const CapacityIndex& index, State& s) {
  for (int round = 0; round < 4 && !caps_ok(P, s); ++round) {
    for (const CapLimit& cap : P.caps) {
      if (cap_ok(s, cap)) continue;
      const auto& crit = P.crit[cap.criterion];
      MinTree tree(P.n);
      for (std::uint32_t i = 0; i < P.n; ++i) {
        if (!s.x[i]) tree.set(index.position(i), crit[i], i);
      }
      bool progress = true;
      while (!cap_ok(s, cap) && progress) {
        progress = false;
        std::vector<std::uint32_t> installed;
        for (std::uint32_t i = 0; i < P.n; ++i) {
          if (s.x[i]) installed.push_back(i);
        }
        std::sort(installed.begin(), installed.end(), [&](std::uint32_t a, std::uint32_t b) {
          return crit[a] != crit[b] ? crit[a] > crit[b] : a < b;
        });
        for (std::uint32_t i : installed) {
          if (cap_ok(s, cap)) break;
          const std::uint32_t j = P.muni[i];
          const double need_nat = P.target - (s.nat - P.cap[i]);
          const bool muni_binding =
              P.floor[j] > P.floor_slack[j] && P.floor[j] - (s.mt[j] - P.cap[i]) > P.floor_slack[j];
          if (need_nat <= P.target_slack && !muni_binding) {
            remove_site(P, s, i);
            tree.set(index.position(i), crit[i], i);
            progress = true;
            continue;
          }
          std::uint32_t u = kNone;
          if (muni_binding) {
            const double need_muni = P.floor[j] - (s.mt[j] - P.cap[i]);
            double best = crit[i];
            for (std::uint32_t w : P.sites_of_muni[j]) {
              if (s.x[w] || P.cap[w] < need_nat - P.target_slack || P.cap[w] < need_muni - P.floor_slack[j]) continue;
              if (crit[w] < best) {
                best = crit[w];
                u = w;
              }
            }
          } else {
            const auto [v, w] = tree.suffix_min(index.first_with_capacity(need_nat - P.target_slack));
            if (w != kNone && v < crit[i]) u = w;
          }
          if (u == kNone) continue;
          bool others_ok = true;
          for (const CapLimit& other : P.caps) {
            if (other.criterion == cap.criterion || !cap_ok(s, other)) continue;
            if (s.tot[other.criterion] - P.crit[other.criterion][i] + P.crit[other.criterion][u] >
                other.limit + other.slack) {
              others_ok = false;
            }
          }
          if (!others_ok) continue;
          remove_site(P, s, i);
          tree.set(index.position(i), crit[i], i);
          add_site(P, s, u);
          tree.set(index.position(u), kInf, kNone);
          progress = true;
        }
        recompute(P, s);
      }
    }
  }
}

// Depth-first exact search over sites in cost-per-MW order. Bounds: the
// fractional national cover, the sum of fractional municipal floor covers,
// and a fractional minimum of every capped criterion.
class ExactSearch {
 public:
  ExactSearch(const Problem& P, std::size_t node_limit) : P_(P), node_limit_(node_limit) {
    std::vector<std::uint32_t> all(P.n);
    std::iota(all.begin(), all.end(), 0u);
    order_ = ratio_order(P, P.cost, all);
    rank_.resize(P.n);
    for (std::uint32_t d = 0; d < P.n; ++d) rank_[order_[d]] = d;
    for (const CapLimit& c : P.caps) {
      cap_orders_.push_back(ratio_order(P, P.crit[c.criterion], all));
    }
    suffix_cap_.assign(P.n + 1, 0.0);
    for (std::size_t d = P.n; d-- > 0;) suffix_cap_[d] = suffix_cap_[d + 1] + P.cap[order_[d]];
    muni_suffix_.assign(P.floored.size(), std::vector<double>(P.n + 1, 0.0));
    floored_pos_.assign(P.n_muni, kNone);
    for (std::size_t q = 0; q < P.floored.size(); ++q) floored_pos_[P.floored[q]] = static_cast<std::uint32_t>(q);
    for (std::size_t q = 0; q < P.floored.size(); ++q) {
      for (std::size_t d = P.n; d-- > 0;) {
        const std::uint32_t i = order_[d];
        muni_suffix_[q][d] = muni_suffix_[q][d + 1] + (P.muni[i] == P.floored[q] ? P.cap[i] : 0.0);
      }
    }
    residual_scratch_.assign(P.floored.size(), 0.0);
  }

  // Returns true when the search completed (the incumbent is then optimal).
  bool run(std::optional<State>& incumbent, double& incumbent_cost) {
    state_ = empty_state(P_);
    cost_ = 0.0;
    incumbent_ = &incumbent;
    incumbent_cost_ = &incumbent_cost;
    nodes_ = 0;
    aborted_ = false;
    search(0);
    return !aborted_;
  }

  std::size_t nodes() const { return nodes_; }

 private:
  double national_bound(std::size_t d) const {
    double residual = P_.target - state_.nat;
    if (residual <= P_.target_slack) return 0.0;
    double total = 0.0;
    for (std::size_t q = d; q < P_.n; ++q) {
      const std::uint32_t i = order_[q];
      if (P_.cap[i] >= residual) return total + P_.cost[i] * (residual / P_.cap[i]);
      total += P_.cost[i];
      residual -= P_.cap[i];
    }
    return kInf;
  }

  double floors_bound(std::size_t d) {
    if (P_.floored.empty()) return 0.0;
    double open = 0.0;
    for (std::size_t q = 0; q < P_.floored.size(); ++q) {
      const std::uint32_t j = P_.floored[q];
      residual_scratch_[q] = P_.floor[j] - state_.mt[j];
      if (residual_scratch_[q] > P_.floor_slack[j]) open += 1.0;
    }
    if (open == 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t q = d; q < P_.n; ++q) {
      const std::uint32_t i = order_[q];
      const std::uint32_t fp = floored_pos_[P_.muni[i]];
      if (fp == kNone) continue;
      double& r = residual_scratch_[fp];
      if (r <= P_.floor_slack[P_.floored[fp]]) continue;
      if (P_.cap[i] >= r) {
        total += P_.cost[i] * (r / P_.cap[i]);
        r = 0.0;
      } else {
        total += P_.cost[i];
        r -= P_.cap[i];
      }
    }
    return total;
  }

  bool caps_reachable(std::size_t d) const {
    const double residual0 = P_.target - state_.nat;
    for (std::size_t c = 0; c < P_.caps.size(); ++c) {
      const CapLimit& cap = P_.caps[c];
      double tot = state_.tot[cap.criterion];
      if (tot > cap.limit + cap.slack) return false;
      double residual = residual0;
      if (residual <= P_.target_slack) continue;
      for (std::uint32_t i : cap_orders_[c]) {
        if (rank_[i] < d) continue;
        const double v = P_.crit[cap.criterion][i];
        if (P_.cap[i] >= residual) {
          tot += v * (residual / P_.cap[i]);
          residual = 0.0;
          break;
        }
        tot += v;
        residual -= P_.cap[i];
      }
      if (tot > cap.limit + cap.slack) return false;
    }
    return true;
  }

  void search(std::size_t d) {
    if (aborted_) return;
    if (++nodes_ > node_limit_) {
      aborted_ = true;
      return;
    }
    if (!caps_ok(P_, state_)) return;
    if (capacity_ok(P_, state_) && floors_ok(P_, state_)) {
      // Costs are nonnegative, so nothing below this node is cheaper.
      if (!incumbent_->has_value() || improves(cost_, *incumbent_cost_)) {
        State copy = state_;
        recompute(P_, copy);
        *incumbent_ = std::move(copy);
        *incumbent_cost_ = cost_;
      }
      return;
    }
    if (d == P_.n) return;
    if (state_.nat + suffix_cap_[d] < P_.target - P_.target_slack) return;
    for (std::size_t q = 0; q < P_.floored.size(); ++q) {
      const std::uint32_t j = P_.floored[q];
      if (state_.mt[j] + muni_suffix_[q][d] < P_.floor[j] - P_.floor_slack[j]) return;
    }
    const double lb = cost_ + std::max(national_bound(d), floors_bound(d));
    if (incumbent_->has_value() && !improves(lb, *incumbent_cost_)) return;
    if (!caps_reachable(d)) return;

    const std::uint32_t i = order_[d];
    add_site(P_, state_, i);
    cost_ += P_.cost[i];
    search(d + 1);
    cost_ -= P_.cost[i];
    remove_site(P_, state_, i);
    search(d + 1);
  }

  const Problem& P_;
  std::size_t node_limit_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::vector<std::uint32_t>> cap_orders_;
  std::vector<double> suffix_cap_;
  std::vector<std::vector<double>> muni_suffix_;
  std::vector<std::uint32_t> floored_pos_;
  std::vector<double> residual_scratch_;
  State state_;
  double cost_ = 0.0;
  std::optional<State>* incumbent_ = nullptr;
  double* incumbent_cost_ = nullptr;
  std::size_t nodes_ = 0;
  bool aborted_ = false;
};

std::vector<std::uint8_t> to_decision(const Problem& P, const State& s) {
  std::vector<std::uint8_t> decision(P.n, 0);
  for (std::uint32_t i = 0; i < P.n; ++i) decision[P.to_instance[i]] = s.x[i];
  return decision;
}

std::string cap_infeasibility_message(const CapLimit& cap, double minimum) {
  return "cap on total " + to_string(static_cast<Criterion>(cap.criterion)) + " (" + std::to_string(cap.limit) +
         ") is below the minimum achievable total (>= " + std::to_string(minimum) + ")";
}

void finish_gap(Selection& sel) {
  if (sel.lower_bound > sel.objective) sel.lower_bound = sel.objective;
  if (sel.lower_bound > 0.0) {
    sel.gap = (sel.objective - sel.lower_bound) / sel.lower_bound;
  } else {
    sel.gap = sel.objective == 0.0 ? 0.0 : kInf;
  }
}

}  // namespace

Selection make_selection(const Instance& instance, std::span<const double> site_cost,
                         std::vector<std::uint8_t> decision) {
  if (decision.size() != instance.candidates.size() || site_cost.size() != instance.candidates.size()) {
    throw ValidationError("decision vector size does not match candidate count");
  }
  std::vector<std::size_t> picked;
  for (std::size_t k = 0; k < decision.size(); ++k) {
    if (decision[k]) picked.push_back(k);
  }
  std::sort(picked.begin(), picked.end(), [&](std::size_t a, std::size_t b) {
    return instance.candidates[a].site_id < instance.candidates[b].site_id;
  });
  Selection sel;
  double weighted_lcoe = 0.0, weighted_scen = 0.0, weighted_len = 0.0;
  for (std::size_t k : picked) {
    const CandidateSite& c = instance.candidates[k];
    sel.installed.push_back(c.site_id);
    sel.objective += site_cost[k];
    sel.capacity_mw += c.capacity_mw;
    sel.totals.lcoe += c.lcoe_ct_kwh;
    sel.totals.scenicness += c.scenicness;
    sel.totals.network_length_km += c.network_length_km.value_or(0.0);
    weighted_lcoe += c.capacity_mw * c.lcoe_ct_kwh;
    weighted_scen += c.capacity_mw * c.scenicness;
    weighted_len += c.capacity_mw * c.network_length_km.value_or(0.0);
  }
  if (!picked.empty()) {
    const double n = static_cast<double>(picked.size());
    sel.means = {sel.totals.lcoe / n, sel.totals.scenicness / n, sel.totals.network_length_km / n};
    sel.capacity_weighted_means = {weighted_lcoe / sel.capacity_mw, weighted_scen / sel.capacity_mw,
                                   weighted_len / sel.capacity_mw};
  }
  sel.decision = std::move(decision);
  return sel;
}

FeasibilityCheck check_feasibility(const Instance& instance, const std::vector<std::uint8_t>& decision,
                                   const Constraints& constraints) {
  FeasibilityCheck check;
  const std::vector<double> zero(instance.candidates.size(), 0.0);
  const Selection sel = make_selection(instance, zero, decision);
  if (sel.capacity_mw < constraints.cap_obj_mw - feasibility_slack(constraints.cap_obj_mw)) {
    check.capacity_ok = false;
    check.detail += "capacity " + std::to_string(sel.capacity_mw) + " < target " +
                    std::to_string(constraints.cap_obj_mw) + "; ";
  }
  for (Criterion c : kAllCriteria) {
    if (const auto& cap = constraints.cap(c)) {
      if (sel.totals.of(c) > *cap + feasibility_slack(*cap)) {
        check.caps_ok = false;
        check.detail += "total " + to_string(c) + " exceeds cap; ";
      }
    }
  }
  if (!constraints.equity_floors.empty()) {
    std::map<MunicipalityId, double> added;
    std::vector<std::size_t> order(instance.candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return instance.candidates[a].site_id < instance.candidates[b].site_id;
    });
    for (std::size_t k : order) {
      if (decision[k]) added[instance.candidates[k].municipality_id] += instance.candidates[k].capacity_mw;
    }
    for (const auto& [id, floor] : constraints.equity_floors) {
      const double got = added.contains(id) ? added.at(id) : 0.0;
      if (got < floor - feasibility_slack(floor)) {
        check.floors_ok = false;
        check.detail += "municipality " + std::to_string(id) + " below floor; ";
      }
    }
  }
  return check;
}

Selection solve(const Instance& instance, std::span<const double> site_cost, const Constraints& constraints,
                const SolveOptions& options) {
  ValidationOptions vopt;
  vopt.require_network_length = true;
  require_valid(instance, vopt);
  const Problem P = build_problem(instance, site_cost, constraints);
  require_potential(P);

  // A cap below the bound on its own minimum can never be met.
  for (const CapLimit& cap : P.caps) {
    const double minimum = lagrangian_bound(P, P.crit[cap.criterion], 0.0);
    if (cap.limit + cap.slack < minimum - feasibility_slack(minimum)) {
      throw InfeasibleError(cap_infeasibility_message(cap, minimum));
    }
  }

  const CapacityIndex index(P);
  Selection::Diagnostics diag;
  std::optional<State> best;
  double best_cost = kInf;
  auto consider = [&](const State& s) {
    if (!feasible(P, s)) return;
    const double c = state_cost(P, P.cost, s);
    if (!best || improves(c, best_cost)) {
      best = s;
      best_cost = c;
    }
  };

  State last = heuristic(P, index, P.cost, options.local_search, diag.local_search_moves);
  consider(last);

  std::array<double, 3> lambda{};
  auto penalized = [&](const std::array<double, 3>& lam) {
    std::vector<double> v = P.cost;
    for (const CapLimit& c : P.caps) {
      if (lam[c.criterion] == 0.0) continue;
      for (std::uint32_t i = 0; i < P.n; ++i) v[i] += lam[c.criterion] * P.crit[c.criterion][i];
    }
    return v;
  };

  if (!P.caps.empty() && !caps_ok(P, last)) {
    double cost_sum = std::accumulate(P.cost.begin(), P.cost.end(), 0.0);
    for (int pass = 0; pass < 3 && !caps_ok(P, last); ++pass) {
      for (const CapLimit& cap : P.caps) {
        if (cap_ok(last, cap)) continue;
        const int k = cap.criterion;
        const double crit_sum = std::accumulate(P.crit[k].begin(), P.crit[k].end(), 0.0);
        const double base = crit_sum > 0.0 && cost_sum > 0.0 ? 1e-3 * cost_sum / crit_sum : 1e-3;
        double lo = lambda[k];
        double hi = std::max(2.0 * lo, base);
        std::array<double, 3> lam = lambda;
        State at_hi;
        bool bracketed = false;
        for (int grow = 0; grow < 80; ++grow) {
          lam[k] = hi;
          const auto v = penalized(lam);
          at_hi = heuristic(P, index, v, options.local_search, diag.local_search_moves);
          consider(at_hi);
          if (cap_ok(at_hi, cap)) {
            bracketed = true;
            break;
          }
          lo = hi;
          hi *= 4.0;
        }
        if (bracketed) {
          for (int it = 0; it < options.max_bisection_iterations; ++it) {
            if (hi - lo <= 1e-12 * hi) break;
            const double mid = 0.5 * (lo + hi);
            lam[k] = mid;
            const auto v = penalized(lam);
            State at_mid = heuristic(P, index, v, options.local_search, diag.local_search_moves);
            consider(at_mid);
            ++diag.bisection_iterations;
            if (cap_ok(at_mid, cap)) {
              hi = mid;
              at_hi = std::move(at_mid);
            } else {
              lo = mid;
            }
          }
        }
        lambda[k] = hi;
        last = std::move(at_hi);
      }
    }
    if (!best) {
      State repaired = last;
      repair_caps(P, index, repaired);
      consider(repaired);
    }
  }

  if (best && !P.caps.empty()) {
    State polished = *best;
    diag.local_search_moves += polish_with_caps(P, polished, options.polish_pair_budget);
    consider(polished);
  }

  bool proven = false;
  if (P.n <= options.exact_max_sites) {
    ExactSearch exact(P, options.exact_node_limit);
    proven = exact.run(best, best_cost);
    diag.exact_nodes = exact.nodes();
  }

  if (!best) {
    std::string names;
    for (const CapLimit& c : P.caps) names += (names.empty() ? "" : ", ") + to_string(static_cast<Criterion>(c.criterion));
    if (!P.caps.empty()) {
      throw InfeasibleError(std::string(proven ? "no selection satisfies" : "no feasible selection found under") +
                            " the caps on " + names);
    }
    throw InfeasibleError("no feasible selection found for the capacity target and equity floors");
  }

  double bound = lagrangian_bound(P, P.cost, 0.0);
  if (std::any_of(lambda.begin(), lambda.end(), [](double l) { return l > 0.0; })) {
    double constant = 0.0;
    for (const CapLimit& c : P.caps) constant -= lambda[c.criterion] * c.limit;
    bound = std::max(bound, lagrangian_bound(P, penalized(lambda), constant));
  }

  Selection sel = make_selection(instance, site_cost, to_decision(P, *best));
  sel.lower_bound = bound;
  sel.proven_optimal = proven;
  diag.multipliers = lambda;
  sel.diagnostics = diag;
  finish_gap(sel);
  return sel;
}

namespace {

std::vector<double> costs_for(const Instance& instance, const Weights& weights) {
  weights.validate();
  if (weights.is_single_criterion()) return site_costs(instance, weights, nullptr);
  const ScaledCriteria scaled = scale_criteria(instance);
  return site_costs(instance, weights, &scaled);
}

}  // namespace

Selection solve(const Instance& instance, const Weights& weights, const Constraints& constraints,
                const SolveOptions& options) {
  ValidationOptions vopt;
  vopt.require_network_length = true;
  require_valid(instance, vopt);
  const auto costs = costs_for(instance, weights);
  return solve(instance, costs, constraints, options);
}

Selection brute_force(const Instance& instance, std::span<const double> site_cost, const Constraints& constraints) {
  if (instance.candidates.size() > kBruteForceMaxSites) {
    throw ValidationError("brute_force refuses instances with more than " + std::to_string(kBruteForceMaxSites) +
                          " sites");
  }
  ValidationOptions vopt;
  vopt.require_network_length = true;
  require_valid(instance, vopt);
  const Problem P = build_problem(instance, site_cost, constraints);
  const std::size_t n = P.n;

  std::vector<double> mt(P.n_muni, 0.0);
  bool found = false;
  std::uint32_t best_mask = 0;
  double best_cost = kInf;

  // Ascending-id list comparison on bitmasks (bit i = i-th smallest site_id).
  auto lex_less = [n](std::uint32_t a, std::uint32_t b) {
    std::size_t ia = 0, ib = 0;
    for (;;) {
      while (ia < n && !(a >> ia & 1u)) ++ia;
      while (ib < n && !(b >> ib & 1u)) ++ib;
      if (ia == n || ib == n) return ia == n && ib != n;
      if (ia != ib) return ia < ib;
      ++ia;
      ++ib;
    }
  };

  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t m = 0; m < total; ++m) {
    const auto mask = static_cast<std::uint32_t>(m);
    double cap = 0.0, cost = 0.0;
    std::array<double, 3> tot{};
    for (std::uint32_t j : P.floored) mt[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) continue;
      cap += P.cap[i];
      cost += P.cost[i];
      for (int k = 0; k < 3; ++k) tot[k] += P.crit[k][i];
      mt[P.muni[i]] += P.cap[i];
    }
    if (cap < P.target - P.target_slack) continue;
    bool ok = true;
    for (const CapLimit& c : P.caps) ok = ok && tot[c.criterion] <= c.limit + c.slack;
    for (std::uint32_t j : P.floored) ok = ok && mt[j] >= P.floor[j] - P.floor_slack[j];
    if (!ok) continue;
    const double tie = 1e-12 * std::max(1.0, std::abs(best_cost));
    if (!found || cost < best_cost - tie || (std::abs(cost - best_cost) <= tie && lex_less(mask, best_mask))) {
      found = true;
      best_mask = mask;
      best_cost = cost;
    }
  }
  if (!found) throw InfeasibleError("no subset satisfies the constraints");

  State s = empty_state(P);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (best_mask >> i & 1u) s.x[i] = 1;
  }
  Selection sel = make_selection(instance, site_cost, to_decision(P, s));
  sel.lower_bound = sel.objective;
  sel.proven_optimal = true;
  finish_gap(sel);
  return sel;
}

Selection brute_force(const Instance& instance, const Weights& weights, const Constraints& constraints) {
  const auto costs = costs_for(instance, weights);
  return brute_force(instance, costs, constraints);
}

}  // namespace windplan
