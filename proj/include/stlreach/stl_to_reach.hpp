#pragma once

#include "stlreach/dynamics.hpp"
#include "stlreach/formula.hpp"
#include "stlreach/hj_solver.hpp"
#include "stlreach/level_set.hpp"

#include <memory>
#include <string>
#include <vector>

namespace stlreach {

struct ReachOptions {
  double out_dt = 1.0; // export slice spacing
  BrtOptions brt;
  int permutation_cap = 5; // largest N_MRA before "too many targets"
};

// Feasibility set of an STL formula: membership test is value_at(0, x) < 0.
struct FeasibilitySet {
  std::shared_ptr<const LevelSetGrid> value;
  Formula formula;

  bool contains(const Eigen::VectorXd &x) const { return value->value_at(0.0, x) < 0.0; }
  double margin(const Eigen::VectorXd &x) const { return value->value_at(0.0, x); }
};

// Pointwise max / min of two tubes on identical grids and time samples.
LevelSetGrid compose_and(const LevelSetGrid &a, const LevelSetGrid &b);
LevelSetGrid compose_or(const LevelSetGrid &a, const LevelSetGrid &b);

// h-tube of phi1 U_[window] phi2: target = phi2-set gated to the window,
// constraint = phi1-set, solved as a maximal BRT over [0, T]. phi1_set may
// be null (eventually).
LevelSetGrid until_to_brt(const LinearSystem &sys, const TimeVaryingSetPtr &phi1_set,
                          const TimeVaryingSetPtr &phi2_set, double window_lo,
                          double window_hi, double T, const Grid &grid,
                          const ReachOptions &opt = {});

// h-tube of G_[window] phi: minimal BRT toward the complement of phi-set,
// negated. phi_set is the level set of the body (negative inside).
LevelSetGrid always_to_brt(const LinearSystem &sys, const TimeVaryingSetPtr &phi_set,
                           double window_lo, double window_hi, double T,
                           const Grid &grid, const ReachOptions &opt = {});

struct MraLeg {
  TimeVaryingSetPtr target;
  TimeVaryingSetPtr constraint; // may be null
  double window_lo = 0.0;
  double window_hi = 0.0;
};

// Ordered multi-reach-avoid: backward recursion over the legs, each earlier
// target intersected with the tube of the remaining sequence.
LevelSetGrid solve_mra_sequence(const LinearSystem &sys, const std::vector<MraLeg> &legs,
                                double T, const Grid &grid, const ReachOptions &opt = {});

struct VerifyReport {
  std::vector<std::vector<int>> orderings;
  int num_targets = 0;
  int brt_solves = 0;
  double feasible_fraction = 0.0; // nodes with h(0, .) < 0
};

// Full verification: extracts eventually/until conjuncts, enumerates all
// target orderings, folds residual always/predicate conjuncts into every
// leg constraint, unions the per-ordering tubes, and intersects with the
// residual tubes.
FeasibilitySet verify_formula(const LinearSystem &sys, const Formula &phi, double T,
                              const Grid &grid, const ReachOptions &opt = {},
                              VerifyReport *report = nullptr);

double feasible_volume_fraction(const LevelSetGrid &lsg);

} // namespace stlreach
