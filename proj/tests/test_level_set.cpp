#include "stlreach/errors.hpp"
#include "stlreach/level_set.hpp"
#include "stlreach/parser.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace stlreach;

namespace {
Grid grid1d(int n, double lo = -2.0, double hi = 2.0) {
  Eigen::VectorXd l(1), h(1);
  l << lo;
  h << hi;
  return Grid(l, h, {n});
}

Box unit_box(int dim) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(dim, -0.5);
  b.hi = Eigen::VectorXd::Constant(dim, 0.5);
  return b;
}
} // namespace

TEST_CASE("signed distance of the unit box") {
  Box b = unit_box(3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  CHECK(signed_distance_box(b, x) == -0.5); // center: nearest face
  x << 0.5, 0.5, 0.5;
  CHECK(signed_distance_box(b, x) == 0.0); // corner on the boundary
  x << 2.0, 0.0, 0.0;
  CHECK(signed_distance_box(b, x) == doctest::Approx(1.5)); // Euclidean outside
  x << 2.0, 2.0, 0.0;
  CHECK(signed_distance_box(b, x) == doctest::Approx(std::sqrt(2.0) * 1.5));
  CHECK(signed_distance_box(b, x, false) == doctest::Approx(-std::sqrt(2.0) * 1.5));
}

TEST_CASE("degenerate box is rejected") {
  Box b = unit_box(2);
  b.hi[0] = b.lo[0];
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(signed_distance_box(b, x), ConfigError);
}

TEST_CASE("grid indexing round-trips") {
  Eigen::VectorXd lo(3), hi(3);
  lo << 0, 0, 0;
  hi << 1, 2, 3;
  Grid g(lo, hi, {3, 4, 5});
  CHECK(g.num_nodes() == 60);
  int idx[3];
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    g.unravel(node, idx);
    CHECK(g.ravel(idx) == node);
  }
  CHECK(g.stride(0) == 20);
  CHECK(g.stride(2) == 1);
}

TEST_CASE("value_at interpolates linearly") {
  Grid g = grid1d(5, 0.0, 4.0); // nodes at 0,1,2,3,4
  LevelSetGrid lsg;
  lsg.grid = g;
  lsg.times = {0.0, 1.0};
  lsg.values = {{0, 1, 2, 3, 4}, {10, 11, 12, 13, 14}};
  Eigen::VectorXd x(1);
  x << 2.0;
  CHECK(lsg.value_at(0.0, x) == 2.0); // exactly on a node
  x << 1.5;
  CHECK(lsg.value_at(0.0, x) == doctest::Approx(1.5)); // midpoint of 1 and 2
  CHECK(lsg.value_at(0.5, x) == doctest::Approx(6.5)); // halfway in time
  x << 9.0;
  CHECK_THROWS_AS(lsg.value_at(0.0, x), ConfigError);
  x << 1.0;
  CHECK_THROWS_AS(lsg.value_at(3.0, x), ConfigError);
}

TEST_CASE("level set file round-trip") {
  Grid g = grid1d(7);
  LevelSetGrid lsg;
  lsg.grid = g;
  lsg.times = {0.0, 0.5, 1.0};
  for (int k = 0; k < 3; ++k) {
    std::vector<double> slice(7);
    for (int i = 0; i < 7; ++i) slice[i] = 0.25f * i - k;
    lsg.values.push_back(slice);
  }
  std::string path = (std::filesystem::temp_directory_path() / "lsg_roundtrip.lsg").string();
  save_level_set(lsg, path);
  LevelSetGrid back = load_level_set(path);
  CHECK(back.grid == lsg.grid);
  CHECK(back.times == lsg.times);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 7; ++i)
      CHECK(back.values[k][i] == doctest::Approx(lsg.values[k][i]).epsilon(1e-6));
  std::remove(path.c_str());
}

TEST_CASE("state formula level set matches pointwise robustness sign") {
  Eigen::VectorXd lo(2), hi(2);
  lo << -2, -2;
  hi << 2, 2;
  Grid g(lo, hi, {9, 9});
  Formula box = parse_formula("inbox(-0.5,0.5,-0.5,0.5)", 2);
  auto vals = state_formula_levelset(g, box);
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    Eigen::VectorXd x = g.node_point(node);
    bool inside = std::abs(x[0]) < 0.5 && std::abs(x[1]) < 0.5;
    if (inside) CHECK(vals[node] < 0.0);
    bool outside = std::abs(x[0]) > 0.5 || std::abs(x[1]) > 0.5;
    if (outside) CHECK(vals[node] > 0.0);
  }
  // Negation flips the sign.
  auto neg = state_formula_levelset(g, Formula::negate(box));
  for (std::size_t node = 0; node < g.num_nodes(); ++node)
    CHECK(neg[node] == -vals[node]);
}

TEST_CASE("windowed set returns the outside value off-window") {
  Grid g = grid1d(5);
  auto inner = make_constant_set(-3.0);
  auto w = make_windowed_set(inner, 1.0, 2.0, kLargeValue);
  std::vector<double> buf;
  w->sample(0.5, g, buf);
  CHECK(buf[0] == kLargeValue);
  w->sample(1.5, g, buf);
  CHECK(buf[0] == -3.0);
  w->sample(2.0, g, buf);
  CHECK(buf[0] == -3.0);
}

TEST_CASE("max and min set combinators") {
  Grid g = grid1d(4, 0.0, 3.0);
  auto a = make_static_set({0, 1, 2, 3});
  auto b = make_constant_set(1.5);
  std::vector<double> buf;
  make_max_set({a, b})->sample(0.0, g, buf);
  CHECK(buf == std::vector<double>{1.5, 1.5, 2.0, 3.0});
  make_min_set({a, b})->sample(0.0, g, buf);
  CHECK(buf == std::vector<double>{0.0, 1.0, 1.5, 1.5});
}
