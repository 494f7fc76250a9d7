#pragma once

#include "stlreach/dynamics.hpp"
#include "stlreach/level_set.hpp"
#include "stlreach/trajectory.hpp"

#include <map>
#include <string>
#include <vector>

namespace stlreach {

// Convex QP: min 1/2 z'Hz + q'z  s.t.  l <= Az <= u.
struct Qp {
  Eigen::MatrixXd H;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l, u;
};

enum class QpStatus { Solved, MaxIterations, PrimalInfeasible };

struct QpResult {
  QpStatus status = QpStatus::MaxIterations;
  Eigen::VectorXd z;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool polished = false;
};

struct QpSettings {
  double eps = 1e-8; // KKT residual target before polish
  int max_iterations = 50000;
  double rho = 0.1;
  double sigma = 1e-6;
};

// Operator-splitting solve with a terminal active-set polish; deterministic.
QpResult solve_qp(const Qp &qp, const QpSettings &settings = {});

struct MpcConfig {
  int horizon = 10;
  Eigen::MatrixXd Q, P, R; // positive definite (checked by factorization)
  double terminal_scale = 3.0; // terminal box half-width = scale * max ref step
  double safety_margin = 0.2;  // obstacle inflation
  int substeps = 5;            // controller steps per planner step
  QpSettings qp;

  void validate(int state_dim, int input_dim) const;
};

// Box obstacle in the position dimensions (0, 1) with inflation margin.
struct ObstacleState {
  std::string name;
  Box box; // 2-D position box
  double margin = 0.0;
};

struct StepInfo {
  Eigen::VectorXd u;
  QpStatus qp_status = QpStatus::Solved;
  bool emergency_brake = false; // braking fallback applied
  bool inside_obstacle = false; // current state strictly inside a raw obstacle
  double tracking_error = 0.0;  // position error to the reference
  int active_constraints = 0;
  double qp_objective = 0.0;
};

// Receding-horizon tracker of a fine-sampled reference with per-step
// separating-face obstacle constraints.
class TrackingController {
public:
  TrackingController(const LinearSystem &sys, Trajectory reference, MpcConfig cfg);

  StepInfo step(const Eigen::VectorXd &xk, double t,
                const std::vector<ObstacleState> &obstacles);

  const Trajectory &reference() const { return ref_; }
  const DiscreteSystem &fine_system() const { return dsys_; }
  const MpcConfig &config() const { return cfg_; }

private:
  LinearSystem sys_;
  Trajectory ref_;
  MpcConfig cfg_;
  DiscreteSystem dsys_;
  Eigen::VectorXd u_prev_;
  std::vector<Eigen::MatrixXd> ad_pow_;           // Ad^l, l = 0..N
  std::vector<std::vector<Eigen::MatrixXd>> gmat_; // Ad^(l-1-j) Bd blocks
  std::vector<Eigen::Vector2d> predicted_;         // last predicted positions
  bool have_prediction_ = false;

  Eigen::VectorXd reference_state(long fine_index) const;
  Eigen::VectorXd braking_input(const Eigen::VectorXd &xk) const;
};

// Exact ZOH resampling of a coarse planned trajectory to dt/substeps; the
// resampled trace passes through the plan states.
Trajectory resample_plan(const LinearSystem &sys, const Trajectory &plan, int substeps);

struct ObstacleMove {
  std::string name;
  double dx = 0.0, dy = 0.0;
  double at_t = 0.0;
};

// Scripted world: named position boxes plus teleport events.
struct World {
  std::map<std::string, Box> obstacles;
  std::vector<ObstacleMove> script;

  std::map<std::string, Box> at(double t) const;
};

struct ClosedLoopEvent {
  double t = 0.0;
  Eigen::VectorXd x, u;
  QpStatus qp_status = QpStatus::Solved;
  bool violation = false; // position inside a raw obstacle box
  bool emergency_brake = false;
  double tracking_error = 0.0;
  int active_constraints = 0;
};

struct ClosedLoopResult {
  Trajectory trace;
  std::vector<ClosedLoopEvent> events;
  int violations = 0;
  int flagged_steps = 0;
};

ClosedLoopResult run_closed_loop(const LinearSystem &sys, TrackingController &ctrl,
                                 const World &world, int steps,
                                 const Eigen::VectorXd &x0);

// Collision test used by the event log and the replay check.
bool position_in_box(const Eigen::VectorXd &state, const Box &box2d);

} // namespace stlreach
