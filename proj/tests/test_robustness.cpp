#include "stlreach/errors.hpp"
#include "stlreach/parser.hpp"
#include "stlreach/robustness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace stlreach;

namespace {

Trajectory signal_1d(const std::vector<double> &vals, double dt = 1.0) {
  Trajectory t;
  t.dt = dt;
  for (double v : vals) {
    Eigen::VectorXd x(1);
    x << v;
    t.states.push_back(x);
  }
  return t;
}

// Independent brute-force recursive evaluator over 1-D signals, written
// directly from the min/max semantics (test oracle; shares nothing with the
// library evaluation path).
double brute_rho(const std::vector<double> &sig, long k, const Formula &f) {
  switch (f.kind()) {
  case NodeKind::True:
    return std::numeric_limits<double>::infinity();
  case NodeKind::Pred:
    return f.predicate().a[0] * sig[static_cast<std::size_t>(k)] - f.predicate().b;
  case NodeKind::Not:
    return -brute_rho(sig, k, f.child(0));
  case NodeKind::And: {
    double v = std::numeric_limits<double>::infinity();
    for (const auto &c : f.children()) v = std::min(v, brute_rho(sig, k, c));
    return v;
  }
  case NodeKind::Or: {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto &c : f.children()) v = std::max(v, brute_rho(sig, k, c));
    return v;
  }
  case NodeKind::Eventually: {
    long a = static_cast<long>(std::ceil(f.window_lo()));
    long b = static_cast<long>(std::floor(f.window_hi()));
    double v = -std::numeric_limits<double>::infinity();
    for (long j = k + a; j <= k + b; ++j) v = std::max(v, brute_rho(sig, j, f.child(0)));
    return v;
  }
  case NodeKind::Always: {
    long a = static_cast<long>(std::ceil(f.window_lo()));
    long b = static_cast<long>(std::floor(f.window_hi()));
    double v = std::numeric_limits<double>::infinity();
    for (long j = k + a; j <= k + b; ++j) v = std::min(v, brute_rho(sig, j, f.child(0)));
    return v;
  }
  case NodeKind::Until: {
    long a = static_cast<long>(std::ceil(f.window_lo()));
    long b = static_cast<long>(std::floor(f.window_hi()));
    double best = -std::numeric_limits<double>::infinity();
    for (long j = k + a; j <= k + b; ++j) {
      double inner = brute_rho(sig, j, f.child(1));
      for (long j2 = k; j2 <= j; ++j2) inner = std::min(inner, brute_rho(sig, j2, f.child(0)));
      best = std::max(best, inner);
    }
    return best;
  }
  }
  return 0.0;
}

// Random formula generator: integer windows, nesting depth <= max_depth,
// windows sized so every evaluation stays inside the signal horizon.
struct FormulaGen {
  std::mt19937_64 rng;
  explicit FormulaGen(std::uint64_t seed) : rng(seed) {}

  Formula pred() {
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    double a = 0.0;
    while (std::abs(a) < 0.1) a = coef(rng);
    Eigen::VectorXd av(1);
    av << a;
    return Formula::pred(Predicate(av, coef(rng)));
  }

  Formula gen(int depth, int budget) {
    std::uniform_int_distribution<int> kind(0, depth <= 0 || budget <= 0 ? 1 : 6);
    std::uniform_int_distribution<int> wdist(0, std::max(0, std::min(2, budget)));
    switch (kind(rng)) {
    case 0:
    case 1:
      return pred();
    case 2:
      return Formula::negate(gen(depth - 1, budget));
    case 3:
      return Formula::conj({gen(depth - 1, budget), gen(depth - 1, budget)});
    case 4: {
      int lo = wdist(rng);
      int hi = lo + wdist(rng);
      return Formula::eventually(lo, std::min(hi, budget), gen(depth - 1, budget - std::min(hi, budget)));
    }
    case 5: {
      int lo = wdist(rng);
      int hi = lo + wdist(rng);
      return Formula::always(lo, std::min(hi, budget), gen(depth - 1, budget - std::min(hi, budget)));
    }
    default: {
      int lo = wdist(rng);
      int hi = lo + wdist(rng);
      int used = std::min(hi, budget);
      return Formula::until(lo, used, gen(depth - 1, budget - used),
                            gen(depth - 1, budget - used));
    }
    }
  }
};

} // namespace

TEST_CASE("predicate robustness is the signed margin") {
  // p_x = 5, phi = (p_x >= 2) -> 3.
  Trajectory t = signal_1d({5.0});
  Formula f = parse_formula("x0 >= 2", 1);
  CHECK(robustness(t, 0, f) == 3.0);
  CHECK(satisfies(t, f));
}

TEST_CASE("conjunction takes the min") {
  // rho(phi1) = 1, rho(phi2) = -2 -> -2.
  Trajectory t = signal_1d({0.0});
  Formula f = Formula::conj({parse_formula("x0 >= -1", 1), parse_formula("x0 >= 2", 1)});
  CHECK(robustness(t, 0, f) == -2.0);
}

TEST_CASE("eventually over a short signal") {
  // x = [0,1,3], F[0,2](x >= 2) at 0 -> 1 (brute-force max of x-2).
  Trajectory t = signal_1d({0.0, 1.0, 3.0});
  Formula f = parse_formula("F[0,2] (x0 >= 2)", 1);
  std::vector<double> sig = {0.0, 1.0, 3.0};
  CHECK(brute_rho(sig, 0, f) == 1.0);
  CHECK(robustness(t, 0, f) == 1.0);
}

TEST_CASE("satisfaction is strict") {
  Trajectory t = signal_1d({2.0});
  CHECK_FALSE(satisfies(t, parse_formula("x0 >= 2", 1)));   // rho = 0
  CHECK_FALSE(satisfies(t, parse_formula("x0 >= 2.1", 1))); // rho = -0.1
  CHECK(satisfies(t, parse_formula("x0 >= 1", 1)));
}

TEST_CASE("out-of-horizon window is an error, not -inf") {
  Trajectory t = signal_1d({0.0, 1.0});
  CHECK_THROWS_AS(robustness(t, 0, parse_formula("F[0,5] (x0 >= 0)", 1)), ConfigError);
  CHECK_THROWS_AS(robustness(t, 1, parse_formula("F[1,1] (x0 >= 0)", 1)), ConfigError);
  // A window that encloses no sample is also an error.
  Trajectory t2 = signal_1d({0.0, 1.0, 2.0});
  t2.dt = 1.0;
  CHECK_THROWS_AS(robustness(t2, 0, Formula::eventually(0.4, 0.6, parse_formula("x0 >= 0", 1))),
                  ConfigError);
}

TEST_CASE("negation involution") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  FormulaGen gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> sig(10);
    for (auto &v : sig) v = val(rng);
    Trajectory t = signal_1d(sig);
    Formula f = gen.gen(3, 4);
    Formula nn = Formula::negate(Formula::negate(f));
    CHECK(robustness(t, 0, nn) == robustness(t, 0, f));
  }
}

TEST_CASE("disjunction equals De Morgan dual") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  FormulaGen gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> sig(10);
    for (auto &v : sig) v = val(rng);
    Trajectory t = signal_1d(sig);
    Formula a = gen.gen(2, 3), b = gen.gen(2, 3);
    Formula disj = Formula::disj({a, b});
    Formula dual = Formula::negate(Formula::conj({Formula::negate(a), Formula::negate(b)}));
    CHECK(robustness(t, 0, disj) == robustness(t, 0, dual));
  }
}

TEST_CASE("eventually equals true-until, exactly") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  FormulaGen gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> sig(12);
    for (auto &v : sig) v = val(rng);
    Trajectory t = signal_1d(sig);
    Formula body = gen.gen(2, 2);
    std::uniform_int_distribution<int> w(0, 3);
    int lo = w(rng), hi = lo + w(rng);
    Formula ev = Formula::eventually(lo, hi, body);
    Formula un = Formula::until(lo, hi, Formula::truth(), body);
    CHECK(robustness(t, 0, ev) == robustness(t, 0, un));
  }
}

TEST_CASE("robustness matches the brute-force oracle on random formulas") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_int_distribution<int> len(6, 12);
  FormulaGen gen(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> sig(len(rng));
    for (auto &v : sig) v = val(rng);
    Trajectory t = signal_1d(sig);
    Formula f = gen.gen(4, 5);
    double got = robustness(t, 0, f);
    double want = brute_rho(sig, 0, f);
    CHECK(got == want);
  }
}

TEST_CASE("satisfying witness confirms the sign") {
  // For rho > 0 the eventually witness index must satisfy the body.
  Trajectory t = signal_1d({0.0, 0.5, 2.5, 1.0});
  Formula body = parse_formula("x0 >= 2", 1);
  Formula f = Formula::eventually(0, 3, body);
  double r = robustness(t, 0, f);
  REQUIRE(r > 0.0);
  bool witness = false;
  for (std::size_t j = 0; j <= 3; ++j)
    if (robustness(t, j, body) > 0.0) witness = true;
  CHECK(witness);
}
