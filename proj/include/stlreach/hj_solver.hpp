#pragma once

#include "stlreach/dynamics.hpp"
#include "stlreach/level_set.hpp"

#include <vector>

namespace stlreach {

struct BrtOptions {
  double dt_solver = 0.0; // 0 = auto from the CFL bound
  double cfl_factor = 0.5;
};

// Uniformly spaced export times t0, t0+out_dt, ..., T (T always included).
std::vector<double> make_export_times(double t0, double T, double out_dt);

// Largest stable solver step for this system/grid (CFL bound).
double cfl_time_step(const LinearSystem &sys, const Grid &grid, bool minimal,
                     double cfl_factor = 0.5);

// Maximal backward reachable tube: first-order upwind / Lax-Friedrichs
// solve of the variational inequality, backward from T. Each step applies
// V <- max(constraint, min(target, V_prop)) with the Hamiltonian minimized
// over the admissible inputs (and maximized over the disturbance bound when
// one is set). The sublevel set {h < 0} approximates the tube. constraint
// may be null.
LevelSetGrid solve_maximal_brt(const LinearSystem &sys, const TimeVaryingSetPtr &target,
                               const TimeVaryingSetPtr &constraint, double t0, double T,
                               const Grid &grid, const std::vector<double> &export_times,
                               const BrtOptions &opt = {});

// Minimal backward reachable tube: control maximizes (tries to avoid the
// target), disturbance minimizes; no constraint set.
LevelSetGrid solve_minimal_brt(const LinearSystem &sys, const TimeVaryingSetPtr &target,
                               double t0, double T, const Grid &grid,
                               const std::vector<double> &export_times,
                               const BrtOptions &opt = {});

} // namespace stlreach
