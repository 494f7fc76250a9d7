#include "stlreach/dynamics.hpp"
#include "stlreach/errors.hpp"

#include <doctest.h>

using namespace stlreach;

namespace {
LinearSystem demo_system() { return double_integrator({0, 0}, {15, 15}, 1.0, 0.5); }
} // namespace

TEST_CASE("double integrator derivative") {
  LinearSystem s = demo_system();
  Eigen::VectorXd x(4), u(2);
  x << 1, 2, 0.5, -0.5;
  u << 0, 0;
  Eigen::VectorXd d = s.derivative(x, u);
  CHECK(d[0] == 0.5);
  CHECK(d[1] == -0.5);
  CHECK(d[2] == 0.0);
  CHECK(d[3] == 0.0);
  x.setZero();
  u << 0.5, 0;
  d = s.derivative(x, u);
  CHECK(d[2] == 0.5);
  CHECK(d[3] == 0.0);
}

TEST_CASE("scenario bounds stored verbatim") {
  LinearSystem s = demo_system();
  CHECK(s.state_lo[0] == 0.0);
  CHECK(s.state_hi[1] == 15.0);
  CHECK(s.state_hi[2] == 1.0);
  CHECK(s.input_hi[0] == 0.5);
}

TEST_CASE("zero-order hold is exact for the double integrator") {
  LinearSystem s = demo_system();
  DiscreteSystem d = discretize(s, 1.0);
  // p+ = p + v dt + u dt^2/2, v+ = v + u dt.
  CHECK(d.Ad(0, 2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.Bd(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.Bd(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

  Eigen::VectorXd x(4), u(2);
  x << 0, 0, 1, 0;
  u << 0, 0;
  Eigen::VectorXd nxt = step(d, x, u);
  CHECK(nxt[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nxt[2] == doctest::Approx(1.0).epsilon(1e-12));

  x.setZero();
  u << 0.5, 0;
  nxt = step(d, x, u);
  CHECK(nxt[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(nxt[2] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dt = 0 is rejected") {
  CHECK_THROWS_AS(discretize(demo_system(), 0.0), ConfigError);
}

TEST_CASE("zero A gives Ad = I, Bd = B dt") {
  LinearSystem s = single_integrator(2, Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), 1.0);
  DiscreteSystem d = discretize(s, 0.7);
  CHECK(d.Ad.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-12));
  CHECK(d.Bd.isApprox(0.7 * Eigen::MatrixXd::Identity(2, 2), 1e-12));
}

TEST_CASE("discretization matches dense RK4 integration") {
  LinearSystem s = demo_system();
  double dt = 0.37;
  DiscreteSystem d = discretize(s, dt);
  Eigen::VectorXd x(4), u(2);
  x << 3, 4, 0.5, -0.25;
  u << 0.3, -0.2;
  // RK4 on the linear model with constant input (exact for this system).
  int n_sub = 64;
  double h = dt / n_sub;
  Eigen::VectorXd y = x;
  for (int i = 0; i < n_sub; ++i) {
    Eigen::VectorXd k1 = s.derivative(y, u);
    Eigen::VectorXd k2 = s.derivative(y + 0.5 * h * k1, u);
    Eigen::VectorXd k3 = s.derivative(y + 0.5 * h * k2, u);
    Eigen::VectorXd k4 = s.derivative(y + h * k3, u);
    y += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  CHECK((step(d, x, u) - y).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("semigroup property of ZOH") {
  LinearSystem s = demo_system();
  DiscreteSystem d1 = discretize(s, 0.4);
  DiscreteSystem d2 = discretize(s, 0.8);
  Eigen::VectorXd x(4), u(2);
  x << 1, 2, -0.5, 0.25;
  u << 0.1, -0.3;
  Eigen::VectorXd two_small = step(d1, step(d1, x, u), u);
  Eigen::VectorXd one_big = step(d2, x, u);
  CHECK((two_small - one_big).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("step rejects dimension mismatches") {
  DiscreteSystem d = discretize(demo_system(), 0.5);
  Eigen::VectorXd x(3), u(2);
  x.setZero();
  u.setZero();
  CHECK_THROWS_AS(step(d, x, u), ConfigError);
}
