#pragma once

#include <Eigen/Core>

namespace stlreach {

// Continuous-time linear model xdot = A x + B u with box bounds on states
// and inputs. An optional per-dimension additive disturbance bound is kept
// for the reachability Hamiltonian; shipped scenarios use none.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::VectorXd state_lo, state_hi;
  Eigen::VectorXd input_lo, input_hi;
  Eigen::VectorXd disturbance_bound; // per-state |d_i| bound; empty = none

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }

  void validate() const;
  Eigen::VectorXd derivative(const Eigen::VectorXd &x, const Eigen::VectorXd &u) const;
};

struct DiscreteSystem {
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Bd;
  double dt = 0.0;

  int state_dim() const { return static_cast<int>(Ad.rows()); }
  int input_dim() const { return static_cast<int>(Bd.cols()); }
};

// Planar double integrator: state [px, py, vx, vy], input [ax, ay].
LinearSystem double_integrator(const Eigen::Vector2d &pos_lo,
                               const Eigen::Vector2d &pos_hi, double vel_max,
                               double acc_max);

// Single integrator xdot = u in n dimensions (used by reduced instances).
LinearSystem single_integrator(int n, const Eigen::VectorXd &pos_lo,
                               const Eigen::VectorXd &pos_hi, double speed_max);

// Exact zero-order-hold discretization via a scaled Taylor series of the
// augmented matrix [[A, B], [0, 0]]; exact for nilpotent A.
DiscreteSystem discretize(const LinearSystem &sys, double dt);

// One discrete step Ad x + Bd u; no clamping.
Eigen::VectorXd step(const DiscreteSystem &sys, const Eigen::VectorXd &x,
                     const Eigen::VectorXd &u);

} // namespace stlreach
