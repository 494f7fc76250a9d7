#include "stlreach/errors.hpp"
#include "stlreach/parser.hpp"
#include "stlreach/stl_to_reach.hpp"

#include <doctest.h>

#include <cmath>

using namespace stlreach;

namespace {

LinearSystem integrator_1d(double speed = 1.0, double lo = -8.0, double hi = 8.0) {
  Eigen::VectorXd l(1), h(1);
  l << lo;
  h << hi;
  return single_integrator(1, l, h, speed);
}

Grid grid_1d(int n = 161, double lo = -8.0, double hi = 8.0) {
  Eigen::VectorXd l(1), h(1);
  l << lo;
  h << hi;
  return Grid(l, h, {n});
}

LevelSetGrid flat_tube(const Grid &g, std::vector<double> times, double v) {
  LevelSetGrid lsg;
  lsg.grid = g;
  lsg.times = std::move(times);
  lsg.values.assign(lsg.times.size(), std::vector<double>(g.num_nodes(), v));
  return lsg;
}

Formula interval_formula(double lo, double hi) {
  // 1-D interval [lo, hi] as a two-face conjunction.
  Eigen::VectorXd a(1);
  a << 1.0;
  Eigen::VectorXd an(1);
  an << -1.0;
  return Formula::conj({Formula::pred(Predicate(a, lo)), Formula::pred(Predicate(an, -hi))});
}

// Minimum travel time to an interval for the speed-limited 1-D integrator
// (exact oracle).
double travel_time(double from, std::pair<double, double> to, double speed) {
  if (from >= to.first && from <= to.second) return 0.0;
  double d = from < to.first ? to.first - from : from - to.second;
  return d / speed;
}

} // namespace

TEST_CASE("compose_and is pointwise max with identity element") {
  Grid g = grid_1d(11);
  LevelSetGrid a = flat_tube(g, {0.0, 1.0}, -1.0);
  LevelSetGrid b = flat_tube(g, {0.0, 1.0}, 2.0);
  CHECK(compose_and(a, b).values[0][0] == 2.0);
  CHECK(compose_and(a, a).values[0][0] == -1.0);
  CHECK(compose_and(a, flat_tube(g, {0.0, 1.0}, -kLargeValue)).values[0][0] == -1.0);
}

TEST_CASE("compose_or is pointwise min") {
  Grid g = grid_1d(11);
  LevelSetGrid a = flat_tube(g, {0.0, 1.0}, -1.0);
  LevelSetGrid b = flat_tube(g, {0.0, 1.0}, 2.0);
  CHECK(compose_or(a, b).values[0][0] == -1.0);
  CHECK(compose_or(b, a).values[0][0] == -1.0);
  CHECK(compose_or(b, flat_tube(g, {0.0, 1.0}, kLargeValue)).values[0][0] == 2.0);
}

TEST_CASE("compose rejects grid mismatches") {
  LevelSetGrid a = flat_tube(grid_1d(11), {0.0, 1.0}, 0.0);
  LevelSetGrid b = flat_tube(grid_1d(21), {0.0, 1.0}, 0.0);
  CHECK_THROWS_AS(compose_and(a, b), ConfigError);
}

TEST_CASE("eventually with whole-space target is feasible everywhere") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(41);
  ReachOptions opt;
  opt.out_dt = 0.5;
  LevelSetGrid lsg =
      until_to_brt(sys, nullptr, make_constant_set(-1.0), 0.0, 1.0, 1.0, g, opt);
  for (double v : lsg.values[0]) CHECK(v < 0.0);
}

TEST_CASE("1-D eventually matches the analytic feasibility interval") {
  LinearSystem sys = integrator_1d(1.0, -2.0, 2.0);
  Grid g = grid_1d(201, -2.0, 2.0);
  Box b;
  b.lo.resize(1);
  b.hi.resize(1);
  b.lo << -0.5;
  b.hi << 0.5;
  ReachOptions opt;
  opt.out_dt = 0.5;
  LevelSetGrid lsg = until_to_brt(sys, nullptr,
                                  make_static_set(signed_distance_box(g, b)), 0.0, 1.0,
                                  1.0, g, opt);
  double tol = 2.0 * g.spacing(0);
  Eigen::VectorXd x(1);
  for (double q : {-1.5 + 2 * tol, 1.5 - 2 * tol, 0.0}) {
    x << q;
    CHECK(lsg.value_at(0.0, x) < 0.0);
  }
  for (double q : {-1.5 - 2 * tol, 1.5 + 2 * tol}) {
    x << q;
    CHECK(lsg.value_at(0.0, x) > 0.0);
  }
}

TEST_CASE("until with a wall constraint blocks states behind the wall") {
  LinearSystem sys = integrator_1d(1.0, -4.0, 4.0);
  Grid g = grid_1d(161, -4.0, 4.0);
  Box target_box;
  target_box.lo.resize(1);
  target_box.hi.resize(1);
  target_box.lo << 1.5;
  target_box.hi << 2.5;
  Box wall;
  wall.lo.resize(1);
  wall.hi.resize(1);
  wall.lo << 0.0;
  wall.hi << 0.75;
  ReachOptions opt;
  opt.out_dt = 1.0;
  auto cons = make_static_set(signed_distance_box(g, wall, false)); // negative outside
  LevelSetGrid lsg = until_to_brt(sys, cons,
                                  make_static_set(signed_distance_box(g, target_box)),
                                  0.0, 4.0, 4.0, g, opt);
  Eigen::VectorXd x(1);
  x << -1.0; // behind the wall
  CHECK(lsg.value_at(0.0, x) > 0.0);
  x << 1.0; // same side as the target
  CHECK(lsg.value_at(0.0, x) < 0.0);
  // Rollout oracle: a 1-D path from -1 to the target must pass the wall.
  bool possible = false;
  for (int dir : {-1, 1}) {
    double pos = -1.0;
    bool violated = false;
    for (int k = 0; k < 400; ++k) {
      pos += 0.01 * dir;
      if (pos >= 0.0 && pos <= 0.75) violated = true;
      if (pos >= 1.5 && pos <= 2.5 && !violated) possible = true;
    }
  }
  CHECK_FALSE(possible);
}

TEST_CASE("always over a satisfiable-everywhere body is feasible everywhere") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(41);
  ReachOptions opt;
  opt.out_dt = 0.5;
  LevelSetGrid lsg = always_to_brt(sys, make_constant_set(-1.0), 0.0, 1.0, 1.0, g, opt);
  for (const auto &slice : lsg.values)
    for (double v : slice) CHECK(v < 0.0);
}

TEST_CASE("always with zero authority is infeasible exactly inside the bad set") {
  LinearSystem sys = integrator_1d(0.0);
  Grid g = grid_1d(81);
  Box bad;
  bad.lo.resize(1);
  bad.hi.resize(1);
  bad.lo << -1.0;
  bad.hi << 0.0;
  ReachOptions opt;
  opt.out_dt = 0.5;
  auto body = make_static_set(signed_distance_box(g, bad, false)); // outside the bad set
  LevelSetGrid lsg = always_to_brt(sys, body, 0.0, 2.0, 2.0, g, opt);
  Eigen::VectorXd x(1);
  x << -0.5;
  CHECK(lsg.value_at(0.0, x) > 0.0); // stuck inside the bad set
  x << 1.0;
  CHECK(lsg.value_at(0.0, x) < 0.0);
}

TEST_CASE("single-leg MRA equals until_to_brt") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(81);
  Box target_box;
  target_box.lo.resize(1);
  target_box.hi.resize(1);
  target_box.lo << 1.0;
  target_box.hi << 2.0;
  ReachOptions opt;
  opt.out_dt = 1.0;
  auto tset = make_static_set(signed_distance_box(g, target_box));
  MraLeg leg{tset, nullptr, 0.0, 3.0};
  LevelSetGrid via_mra = solve_mra_sequence(sys, {leg}, 3.0, g, opt);
  LevelSetGrid via_until = until_to_brt(sys, nullptr, tset, 0.0, 3.0, 3.0, g, opt);
  REQUIRE(via_mra.values.size() == via_until.values.size());
  for (std::size_t k = 0; k < via_mra.values.size(); ++k)
    for (std::size_t i = 0; i < via_mra.values[k].size(); ++i)
      CHECK(via_mra.values[k][i] == via_until.values[k][i]);
}

TEST_CASE("two-target sequence needs the full travel time") {
  // A = [4,5], B = [-5,-4], |u| <= 1; order (A, B) from 0 needs 4 + 9 s.
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(161);
  Box abox, bbox;
  abox.lo.resize(1);
  abox.hi.resize(1);
  abox.lo << 4.0;
  abox.hi << 5.0;
  bbox = abox;
  bbox.lo << -5.0;
  bbox.hi << -4.0;
  ReachOptions opt;
  opt.out_dt = 1.0;
  CHECK(travel_time(0.0, {4.0, 5.0}, 1.0) + travel_time(4.0, {-5.0, -4.0}, 1.0) == 13.0);

  Eigen::VectorXd x0(1);
  x0 << 0.0;
  for (double T : {6.0, 14.0}) {
    MraLeg la{make_static_set(signed_distance_box(g, abox)), nullptr, 0.0, T};
    MraLeg lb{make_static_set(signed_distance_box(g, bbox)), nullptr, 0.0, T};
    LevelSetGrid lsg = solve_mra_sequence(sys, {la, lb}, T, g, opt);
    if (T < 13.0) CHECK(lsg.value_at(0.0, x0) > 0.0);
    else CHECK(lsg.value_at(0.0, x0) < 0.0);
  }
}

TEST_CASE("verify of a pure always formula equals the always chain") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(81);
  Formula f = parse_formula("G[0,2] !( x0 >= -1 & -x0 >= 0 )", 1);
  ReachOptions opt;
  opt.out_dt = 1.0;
  FeasibilitySet fs = verify_formula(sys, f, 2.0, g, opt);
  Formula body = to_pnf(parse_formula("!( x0 >= -1 & -x0 >= 0 )", 1));
  LevelSetGrid chain = always_to_brt(sys, make_static_set(state_formula_levelset(g, body)),
                                     0.0, 2.0, 2.0, g, opt);
  REQUIRE(fs.value->values.size() == chain.values.size());
  for (std::size_t k = 0; k < chain.values.size(); ++k)
    for (std::size_t i = 0; i < chain.values[k].size(); ++i)
      CHECK(fs.value->values[k][i] == chain.values[k][i]);
}

TEST_CASE("union over orderings beats the naive intersection") {
  // F A & F B with far-apart targets: the naive AND of individual tubes
  // admits x = 0 although visiting both within T is impossible.
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(161);
  double T = 6.0;
  Formula fa = Formula::eventually(0.0, T, interval_formula(4.0, 5.0));
  Formula fb = Formula::eventually(0.0, T, interval_formula(-5.0, -4.0));
  ReachOptions opt;
  opt.out_dt = 1.0;

  FeasibilitySet naive_a = verify_formula(sys, fa, T, g, opt);
  FeasibilitySet naive_b = verify_formula(sys, fb, T, g, opt);
  LevelSetGrid naive = compose_and(*naive_a.value, *naive_b.value);

  VerifyReport rep;
  FeasibilitySet joint = verify_formula(sys, Formula::conj({fa, fb}), T, g, opt, &rep);
  CHECK(rep.orderings.size() == 2);

  Eigen::VectorXd x0(1);
  x0 << 0.0;
  // Travel-time oracle: either order needs more than T.
  double best_order = std::min(travel_time(0, {4, 5}, 1) + travel_time(4, {-5, -4}, 1),
                               travel_time(0, {-5, -4}, 1) + travel_time(-4, {4, 5}, 1));
  CHECK(best_order > T);
  CHECK(naive.value_at(0.0, x0) < 0.0);        // naive AND wrongly admits it
  CHECK(joint.value->value_at(0.0, x0) > 0.0); // the ordering union does not
  CHECK(rep.feasible_fraction < 1.0);
}

TEST_CASE("ordering union is invariant under target relabeling") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(81);
  double T = 10.0;
  Formula fa = Formula::eventually(0.0, T, interval_formula(2.0, 3.0));
  Formula fb = Formula::eventually(0.0, T, interval_formula(-3.0, -2.0));
  ReachOptions opt;
  opt.out_dt = 2.0;
  FeasibilitySet ab = verify_formula(sys, Formula::conj({fa, fb}), T, g, opt);
  FeasibilitySet ba = verify_formula(sys, Formula::conj({fb, fa}), T, g, opt);
  for (std::size_t k = 0; k < ab.value->values.size(); ++k)
    for (std::size_t i = 0; i < ab.value->values[k].size(); ++i)
      CHECK(ab.value->values[k][i] == ba.value->values[k][i]);
}

TEST_CASE("symmetric targets give a reflection-symmetric union") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(81);
  double T = 10.0;
  Formula fa = Formula::eventually(0.0, T, interval_formula(2.0, 3.0));
  Formula fb = Formula::eventually(0.0, T, interval_formula(-3.0, -2.0));
  ReachOptions opt;
  opt.out_dt = 2.0;
  FeasibilitySet fs = verify_formula(sys, Formula::conj({fa, fb}), T, g, opt);
  const auto &slice = fs.value->values[0];
  const int n = g.counts[0];
  for (int i = 0; i < n; ++i)
    CHECK(slice[static_cast<std::size_t>(i)] ==
          doctest::Approx(slice[static_cast<std::size_t>(n - 1 - i)]).epsilon(1e-9));
}

TEST_CASE("permutation cap raises a too-many-targets error") {
  LinearSystem sys = integrator_1d();
  Grid g = grid_1d(41);
  std::vector<Formula> conjuncts;
  for (int i = 0; i < 6; ++i)
    conjuncts.push_back(Formula::eventually(0.0, 4.0, interval_formula(i - 3.0, i - 2.5)));
  ReachOptions opt;
  opt.out_dt = 1.0;
  try {
    verify_formula(sys, Formula::conj(conjuncts), 4.0, g, opt);
    FAIL("expected too-many-targets");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("too many targets") != std::string::npos);
  }
}

TEST_CASE("residual always folds into the leg constraints") {
  // F[0,T] target & G[0,T] !wall: states that must cross the wall to reach
  // the target are excluded even though the target alone is reachable.
  LinearSystem sys = integrator_1d(1.0, -4.0, 4.0);
  Grid g = grid_1d(161, -4.0, 4.0);
  double T = 4.0;
  Formula reach = Formula::eventually(0.0, T, interval_formula(1.5, 2.5));
  Formula avoid = Formula::always(0.0, T, Formula::negate(interval_formula(0.0, 0.75)));
  ReachOptions opt;
  opt.out_dt = 1.0;
  FeasibilitySet fs = verify_formula(sys, Formula::conj({reach, avoid}), T, g, opt);
  Eigen::VectorXd x(1);
  x << -1.0;
  CHECK(fs.value->value_at(0.0, x) > 0.0);
  x << 1.0;
  CHECK(fs.value->value_at(0.0, x) < 0.0);
  x << 0.4; // starting inside the wall violates the always immediately
  CHECK(fs.value->value_at(0.0, x) > 0.0);
}
