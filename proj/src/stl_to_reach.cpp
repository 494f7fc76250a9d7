#include "stlreach/stl_to_reach.hpp"

#include "stlreach/errors.hpp"

#include <algorithm>
#include <numeric>

namespace stlreach {

namespace {

void check_match(const LevelSetGrid &a, const LevelSetGrid &b) {
  if (!(a.grid == b.grid)) throw ConfigError("compose: grid mismatch");
  if (a.times != b.times) throw ConfigError("compose: time sample mismatch");
}

LevelSetGrid compose(const LevelSetGrid &a, const LevelSetGrid &b, bool take_max) {
  check_match(a, b);
  LevelSetGrid out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    const auto &bk = b.values[k];
    auto &ok = out.values[k];
    if (take_max)
      for (std::size_t i = 0; i < ok.size(); ++i) ok[i] = std::max(ok[i], bk[i]);
    else
      for (std::size_t i = 0; i < ok.size(); ++i) ok[i] = std::min(ok[i], bk[i]);
  }
  return out;
}

// Static feasibility set (anchored at relative time 0) of a reach-free
// formula. Temporal windows inside are relative to the anchor; with
// time-invariant dynamics and static bodies this is independent of the
// anchor time, so one fixed-horizon solve suffices.
std::vector<double> relative_tube(const LinearSystem &sys, const Grid &grid,
                                  const Formula &f, const ReachOptions &opt,
                                  int *solves) {
  switch (f.kind()) {
  case NodeKind::True:
  case NodeKind::Pred:
  case NodeKind::Not:
    return state_formula_levelset(grid, f);
  case NodeKind::And:
  case NodeKind::Or: {
    bool take_max = f.kind() == NodeKind::And;
    std::vector<double> acc = relative_tube(sys, grid, f.child(0), opt, solves);
    for (std::size_t c = 1; c < f.num_children(); ++c) {
      std::vector<double> next = relative_tube(sys, grid, f.child(c), opt, solves);
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] = take_max ? std::max(acc[i], next[i]) : std::min(acc[i], next[i]);
    }
    return acc;
  }
  case NodeKind::Always: {
    std::vector<double> body = relative_tube(sys, grid, f.child(0), opt, solves);
    const double hi = f.window_hi();
    if (hi <= 0.0) return body; // G[0,0] phi is phi at the anchor sample
    for (double &v : body) v = -v; // target: states violating the body
    auto target = make_windowed_set(make_static_set(std::move(body)), f.window_lo(),
                                    f.window_hi(), kLargeValue);
    auto times = make_export_times(0.0, hi, hi);
    LevelSetGrid m = solve_minimal_brt(sys, target, 0.0, hi, grid, times, opt.brt);
    if (solves) ++*solves;
    std::vector<double> out = m.values.front();
    for (double &v : out) v = -v;
    return out;
  }
  default:
    throw ConfigError("eventually/until nested inside a reach-free context: "
                      "requires iterative application");
  }
}

// Time-varying residual set anchored at absolute mission time (always-type
// conjuncts become full-horizon tubes).
TimeVaryingSetPtr residual_set(const LinearSystem &sys, const Grid &grid,
                               const Formula &f, double T,
                               const std::vector<double> &export_times,
                               const ReachOptions &opt, int *solves) {
  if (f.temporal_free()) return make_static_set(state_formula_levelset(grid, f));
  switch (f.kind()) {
  case NodeKind::And:
  case NodeKind::Or: {
    std::vector<TimeVaryingSetPtr> parts;
    parts.reserve(f.num_children());
    for (const auto &c : f.children())
      parts.push_back(residual_set(sys, grid, c, T, export_times, opt, solves));
    return f.kind() == NodeKind::And ? make_max_set(std::move(parts))
                                     : make_min_set(std::move(parts));
  }
  case NodeKind::Always: {
    std::vector<double> body = relative_tube(sys, grid, f.child(0), opt, solves);
    for (double &v : body) v = -v;
    auto target = make_windowed_set(make_static_set(std::move(body)), f.window_lo(),
                                    f.window_hi(), kLargeValue);
    auto lsg = std::make_shared<LevelSetGrid>(
        solve_minimal_brt(sys, target, 0.0, T, grid, export_times, opt.brt));
    if (solves) ++*solves;
    lsg->negate_in_place();
    return make_grid_backed_set(std::move(lsg));
  }
  default:
    throw ConfigError("eventually/until in a residual conjunct: requires "
                      "iterative application");
  }
}

LevelSetGrid run_sequence(const LinearSystem &sys, const std::vector<MraLeg> &legs,
                          const std::vector<int> &order, double T, const Grid &grid,
                          const std::vector<double> &export_times,
                          const std::vector<TimeVaryingSetPtr> &extra_constraints,
                          const ReachOptions &opt, int *solves) {
  std::shared_ptr<LevelSetGrid> next;
  for (std::size_t j = order.size(); j-- > 0;) {
    const MraLeg &leg = legs[static_cast<std::size_t>(order[j])];
    std::vector<TimeVaryingSetPtr> target_parts{leg.target};
    if (next) target_parts.push_back(make_grid_backed_set(next));
    auto target = make_windowed_set(make_max_set(std::move(target_parts)), leg.window_lo,
                                    leg.window_hi, kLargeValue);
    std::vector<TimeVaryingSetPtr> cons_parts;
    if (leg.constraint) cons_parts.push_back(leg.constraint);
    for (const auto &c : extra_constraints) cons_parts.push_back(c);
    TimeVaryingSetPtr cons = cons_parts.empty() ? nullptr : make_max_set(std::move(cons_parts));
    next = std::make_shared<LevelSetGrid>(
        solve_maximal_brt(sys, target, cons, 0.0, T, grid, export_times, opt.brt));
    if (solves) ++*solves;
  }
  return std::move(*next);
}

} // namespace

LevelSetGrid compose_and(const LevelSetGrid &a, const LevelSetGrid &b) {
  return compose(a, b, true);
}
LevelSetGrid compose_or(const LevelSetGrid &a, const LevelSetGrid &b) {
  return compose(a, b, false);
}

LevelSetGrid until_to_brt(const LinearSystem &sys, const TimeVaryingSetPtr &phi1_set,
                          const TimeVaryingSetPtr &phi2_set, double window_lo,
                          double window_hi, double T, const Grid &grid,
                          const ReachOptions &opt) {
  if (window_lo < 0.0 || window_hi < window_lo || window_hi > T + 1e-9)
    throw ConfigError("until window must lie inside [0, T]");
  auto times = make_export_times(0.0, T, opt.out_dt);
  auto target = make_windowed_set(phi2_set, window_lo, window_hi, kLargeValue);
  return solve_maximal_brt(sys, target, phi1_set, 0.0, T, grid, times, opt.brt);
}

LevelSetGrid always_to_brt(const LinearSystem &sys, const TimeVaryingSetPtr &phi_set,
                           double window_lo, double window_hi, double T,
                           const Grid &grid, const ReachOptions &opt) {
  if (window_lo < 0.0 || window_hi < window_lo || window_hi > T + 1e-9)
    throw ConfigError("always window must lie inside [0, T]");
  auto times = make_export_times(0.0, T, opt.out_dt);
  auto target = make_windowed_set(make_negated_set(phi_set), window_lo, window_hi,
                                  kLargeValue);
  LevelSetGrid m = solve_minimal_brt(sys, target, 0.0, T, grid, times, opt.brt);
  m.negate_in_place();
  return m;
}

LevelSetGrid solve_mra_sequence(const LinearSystem &sys, const std::vector<MraLeg> &legs,
                                double T, const Grid &grid, const ReachOptions &opt) {
  if (legs.empty()) throw ConfigError("MRA sequence must be non-empty");
  std::vector<int> order(legs.size());
  std::iota(order.begin(), order.end(), 0);
  auto times = make_export_times(0.0, T, opt.out_dt);
  return run_sequence(sys, legs, order, T, grid, times, {}, opt, nullptr);
}

FeasibilitySet verify_formula(const LinearSystem &sys, const Formula &phi, double T,
                              const Grid &grid, const ReachOptions &opt,
                              VerifyReport *report) {
  MraExtraction ex = collect_mra_subformulas(phi);
  const int n_mra = static_cast<int>(ex.triples.size());
  if (n_mra > opt.permutation_cap)
    throw ConfigError("too many targets: " + std::to_string(n_mra) +
                      " eventually/until conjuncts exceed the permutation cap of " +
                      std::to_string(opt.permutation_cap));
  for (const auto &t : ex.triples)
    if (t.window_hi > T + 1e-9)
      throw ConfigError("temporal window exceeds the mission time");

  auto export_times = make_export_times(0.0, T, opt.out_dt);
  int solves = 0;

  // Residual conjuncts, folded into every leg constraint and intersected at
  // the end.
  std::vector<TimeVaryingSetPtr> residual_sets;
  if (ex.residual.kind() != NodeKind::True) {
    std::vector<Formula> conjuncts;
    if (ex.residual.kind() == NodeKind::And)
      conjuncts = ex.residual.children();
    else
      conjuncts = {ex.residual};
    for (const auto &c : conjuncts)
      residual_sets.push_back(residual_set(sys, grid, c, T, export_times, opt, &solves));
  }

  LevelSetGrid result;
  std::vector<std::vector<int>> orderings;
  if (n_mra == 0) {
    result.grid = grid;
    result.times = export_times;
    result.values.assign(export_times.size(),
                         std::vector<double>(grid.num_nodes(), -kLargeValue));
  } else {
    std::vector<MraLeg> legs;
    for (const auto &t : ex.triples) {
      MraLeg leg;
      leg.target = make_static_set(relative_tube(sys, grid, t.target, opt, &solves));
      if (t.constraint.kind() != NodeKind::True)
        leg.constraint = make_static_set(relative_tube(sys, grid, t.constraint, opt, &solves));
      leg.window_lo = t.window_lo;
      leg.window_hi = t.window_hi;
      legs.push_back(std::move(leg));
    }
    std::vector<int> order(legs.size());
    std::iota(order.begin(), order.end(), 0);
    bool first = true;
    do {
      orderings.push_back(order);
      LevelSetGrid tube = run_sequence(sys, legs, order, T, grid, export_times,
                                       residual_sets, opt, &solves);
      if (first) {
        result = std::move(tube);
        first = false;
      } else {
        result = compose_or(result, tube);
      }
    } while (std::next_permutation(order.begin(), order.end()));
  }

  // Intersect with the residual obligations at every exported time.
  std::vector<double> buf;
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    for (const auto &rs : residual_sets) {
      rs->sample(result.times[k], grid, buf);
      auto &slice = result.values[k];
      for (std::size_t i = 0; i < slice.size(); ++i)
        slice[i] = std::max(slice[i], std::clamp(buf[i], -kLargeValue, kLargeValue));
    }
  }

  if (report) {
    report->orderings = std::move(orderings);
    report->num_targets = n_mra;
    report->brt_solves = solves;
    report->feasible_fraction = feasible_volume_fraction(result);
  }
  FeasibilitySet fs;
  fs.value = std::make_shared<LevelSetGrid>(std::move(result));
  fs.formula = phi;
  return fs;
}

double feasible_volume_fraction(const LevelSetGrid &lsg) {
  const auto &slice = lsg.values.front();
  std::size_t neg = 0;
  for (double v : slice)
    if (v < 0.0) ++neg;
  return static_cast<double>(neg) / static_cast<double>(slice.size());
}

} // namespace stlreach
