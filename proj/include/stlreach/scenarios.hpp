#pragma once

#include "stlreach/dynamics.hpp"
#include "stlreach/formula.hpp"
#include "stlreach/milp.hpp"
#include "stlreach/mpc.hpp"
#include "stlreach/stl_to_reach.hpp"
#include "stlreach/surrogate.hpp"

#include <map>
#include <string>
#include <vector>

namespace stlreach {

struct Region {
  std::string name;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  std::string kind; // target | goal | obstacle | corridor | key | door | special
  bool approximate = true; // coordinates read off the maps, not exact

  Box box2d() const;
  Box state_box(int state_dim) const; // free in the non-position dimensions
};

struct PlannerConfig {
  double dt = 1.0;
  ObjectiveSpec objective;
  MilpOptions milp;
};

struct Scenario {
  std::string name;
  LinearSystem system;
  double mission_time = 10.0;
  std::map<std::string, Region> regions;
  std::string formula_template; // region names plus {T}-style window expressions
  Grid grid;
  PlannerConfig planner;
  MpcConfig controller;

  // Region names replaced by inbox(...) macros, {expr} windows evaluated at
  // mission time T.
  std::string formula_text(double T) const;
  Formula formula(double T) const;
  World world() const; // obstacle boxes only
  int plan_steps(double T) const;
};

// Built-ins: "scenario1", "scenario2", "scenario3"; anything else is loaded
// as a JSON scenario file.
Scenario load_scenario(const std::string &name_or_path);
void save_scenario_json(const Scenario &scn, const std::string &path);

// Door/key mission conjunction for a scenario with door/key region pairs:
// AND_i(!D_i U[0,T] K_i) & F[0,T] G & G[0,T](AND_j !O_j).
Formula door_key_semantics(const Scenario &scn, double T);
std::string door_key_formula_text(const Scenario &scn);

struct MonteCarloSample {
  Eigen::VectorXd x0;
  double h = 0.0;
  bool brt_feasible = false;
  bool milp_feasible = false;
  bool in_band = false;
};

struct MonteCarloReport {
  int n = 0;
  double band = 0.0;
  long both_feasible = 0;
  long both_infeasible = 0;
  long band_excluded = 0;
  long off_band_disagreements = 0;
  std::vector<MonteCarloSample> samples;
};

// Samples zero-velocity starts uniformly in the position bounds, classifies
// each by sign of h and by planner feasibility; disagreements are counted
// outside the |h| < band boundary strip (band defaults to twice the
// position grid spacing).
MonteCarloReport monte_carlo_feasibility(const Scenario &scn, const FeasibilitySet &fs,
                                         double T, int n_samples, std::uint64_t seed,
                                         double band = -1.0);

struct OverlayReport {
  std::vector<std::array<Eigen::Vector2d, 2>> solver_contour;
  std::vector<std::array<Eigen::Vector2d, 2>> surrogate_contour;
  double hausdorff = 0.0;
  double cell = 0.0; // position grid spacing
  double t_slice = 0.0;
};

// Zero-level contours of the solved tube and the surrogate on the
// (p_x, p_y) slice at zero velocity, plus their Hausdorff distance.
OverlayReport brt_overlay_report(const Scenario &scn, const LevelSetGrid &lsg,
                                 const Mlp &net, double t_slice);

} // namespace stlreach
