#include "stlreach/dynamics.hpp"

#include "stlreach/errors.hpp"

#include <cmath>

namespace stlreach {

void LinearSystem::validate() const {
  const int n = state_dim(), m = input_dim();
  if (A.cols() != n || B.rows() != n)
    throw ConfigError("system matrices have inconsistent dimensions");
  if (state_lo.size() != n || state_hi.size() != n || input_lo.size() != m ||
      input_hi.size() != m)
    throw ConfigError("bound vectors have inconsistent dimensions");
  if ((state_hi - state_lo).minCoeff() < 0.0 || (input_hi - input_lo).minCoeff() < 0.0)
    throw ConfigError("bounds must satisfy lo <= hi elementwise");
  if (disturbance_bound.size() != 0 && disturbance_bound.size() != n)
    throw ConfigError("disturbance bound dimension mismatch");
}

Eigen::VectorXd LinearSystem::derivative(const Eigen::VectorXd &x,
                                         const Eigen::VectorXd &u) const {
  return A * x + B * u;
}

LinearSystem double_integrator(const Eigen::Vector2d &pos_lo,
                               const Eigen::Vector2d &pos_hi, double vel_max,
                               double acc_max) {
  LinearSystem s;
  s.A = Eigen::MatrixXd::Zero(4, 4);
  s.A.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity();
  s.B = Eigen::MatrixXd::Zero(4, 2);
  s.B.block<2, 2>(2, 0) = Eigen::Matrix2d::Identity();
  s.state_lo.resize(4);
  s.state_hi.resize(4);
  s.state_lo << pos_lo(0), pos_lo(1), -vel_max, -vel_max;
  s.state_hi << pos_hi(0), pos_hi(1), vel_max, vel_max;
  s.input_lo = Eigen::Vector2d::Constant(-acc_max);
  s.input_hi = Eigen::Vector2d::Constant(acc_max);
  s.validate();
  return s;
}

LinearSystem single_integrator(int n, const Eigen::VectorXd &pos_lo,
                               const Eigen::VectorXd &pos_hi, double speed_max) {
  LinearSystem s;
  s.A = Eigen::MatrixXd::Zero(n, n);
  s.B = Eigen::MatrixXd::Identity(n, n);
  s.state_lo = pos_lo;
  s.state_hi = pos_hi;
  s.input_lo = Eigen::VectorXd::Constant(n, -speed_max);
  s.input_hi = Eigen::VectorXd::Constant(n, speed_max);
  s.validate();
  return s;
}

DiscreteSystem discretize(const LinearSystem &sys, double dt) {
  if (dt <= 0.0) throw ConfigError("discretization requires dt > 0");
  sys.validate();
  const int n = sys.state_dim(), m = sys.input_dim();

  // exp([[A,B],[0,0]] dt) = [[Ad, Bd],[0, I]], computed by scaling and
  // squaring with a truncated Taylor series.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = sys.A;
  M.topRightCorner(n, m) = sys.B;
  M *= dt;

  double norm = M.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm > 0.5 && squarings < 30) {
    norm *= 0.5;
    ++squarings;
  }
  M /= std::pow(2.0, squarings);

  Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n + m, n + m);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n + m, n + m);
  for (int k = 1; k <= 12; ++k) {
    term = (term * M) / static_cast<double>(k);
    E += term;
  }
  for (int k = 0; k < squarings; ++k) E = E * E;

  DiscreteSystem d;
  d.Ad = E.topLeftCorner(n, n);
  d.Bd = E.topRightCorner(n, m);
  d.dt = dt;
  return d;
}

Eigen::VectorXd step(const DiscreteSystem &sys, const Eigen::VectorXd &x,
                     const Eigen::VectorXd &u) {
  if (x.size() != sys.state_dim() || u.size() != sys.input_dim())
    throw ConfigError("step: state/input dimension mismatch");
  return sys.Ad * x + sys.Bd * u;
}

} // namespace stlreach
