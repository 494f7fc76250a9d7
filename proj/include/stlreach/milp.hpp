#pragma once

#include "stlreach/dynamics.hpp"
#include "stlreach/formula.hpp"
#include "stlreach/trajectory.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace stlreach {

enum class Rel { LE, GE, EQ };

struct LinRow {
  std::vector<std::pair<int, double>> terms; // (variable, coefficient)
  Rel rel = Rel::LE;
  double rhs = 0.0;
};

// Mixed-integer linear program: minimize c'v subject to rows and variable
// bounds; binaries are marked, all with bounds inside [0, 1].
struct MilpProblem {
  std::vector<double> lo, hi, objective;
  std::vector<bool> is_binary;
  std::vector<std::string> names;
  std::vector<LinRow> rows;

  int num_vars() const { return static_cast<int>(lo.size()); }
  int add_var(double lo_, double hi_, double obj, bool binary, std::string name);
  void add_row(LinRow row);

  double eval_row(const LinRow &row, const std::vector<double> &x) const;
  // Largest constraint violation at x.
  double infeasibility(const std::vector<double> &x) const;

  void write_mps(const std::string &path) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  long iterations = 0;
};

// LP relaxation solve (integrality dropped): two-phase bounded-variable
// simplex, Dantzig pricing with Bland's rule as the anti-cycling fallback.
LpSolution solve_lp(const MilpProblem &p);

enum class MilpStatus { Optimal, FeasibleAtLimit, Infeasible, Indeterminate };

struct MilpResult {
  MilpStatus status = MilpStatus::Indeterminate;
  double objective = 0.0;
  double bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
};

struct MilpOptions {
  double gap = 1e-6;
  long node_limit = 500000;
  bool stop_at_first_incumbent = false; // feasibility queries
};

// Best-first branch and bound on the most fractional binary, warm-started
// dual simplex per node.
MilpResult solve_milp(const MilpProblem &p, const MilpOptions &opt = {});

struct ObjectiveSpec {
  double effort_weight = 1.0; // sum |u| (linearized)
  double rho_weight = 10.0;   // reward on the robustness margin
};

// Encoded planning problem plus the variable layout needed to read back a
// trajectory.
struct EncodedPlan {
  MilpProblem problem;
  int horizon = 0;
  int state_dim = 0, input_dim = 0;
  double dt = 1.0;
  int rho_var = -1;
  std::vector<int> x_vars; // (N+1) * state_dim, step-major
  std::vector<int> u_vars; // N * input_dim

  Trajectory extract_trajectory(const std::vector<double> &x) const;
};

// Big-M encoding of the STL-constrained planning problem over N steps of
// the discretized dynamics, with root satisfaction z(phi, 0) = 1 and a
// shared robustness margin rho >= 0.
EncodedPlan encode(const Formula &phi, const LinearSystem &sys, const DiscreteSystem &dsys,
                   const Eigen::VectorXd &x0, int N, const ObjectiveSpec &objective = {});

struct PlanStats {
  long nodes = 0;
  long lp_iterations = 0;
  double wall_s = 0.0;
  double gap = 0.0;
};

struct PlanResult {
  Trajectory trajectory;
  double rho = 0.0; // robustness margin achieved by the MILP
  double objective = 0.0;
  PlanStats stats;
};

// encode + solve + independent robustness re-validation of the returned
// trajectory. nullopt = certified infeasible.
std::optional<PlanResult> plan(const Formula &phi, const LinearSystem &sys, double dt,
                               const Eigen::VectorXd &x0, int N,
                               const ObjectiveSpec &objective = {},
                               const MilpOptions &opt = {});

} // namespace stlreach
