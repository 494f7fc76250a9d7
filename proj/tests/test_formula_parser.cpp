#include "stlreach/errors.hpp"
#include "stlreach/formula.hpp"
#include "stlreach/parser.hpp"

#include <doctest.h>

using namespace stlreach;

namespace {
Eigen::VectorXd unit(int dim, int axis, double sign = 1.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[axis] = sign;
  return v;
}
} // namespace

TEST_CASE("parse eventually over a simple predicate") {
  Formula f = parse_formula("F[0,5] (x0 >= 2)", 4);
  REQUIRE(f.kind() == NodeKind::Eventually);
  CHECK(f.window_lo() == 0.0);
  CHECK(f.window_hi() == 5.0);
  const Formula &p = f.child(0);
  REQUIRE(p.kind() == NodeKind::Pred);
  CHECK(p.predicate().a.isApprox(unit(4, 0)));
  CHECK(p.predicate().b == 2.0);
}

TEST_CASE("inbox macro expands to a four-face conjunction") {
  Formula f = parse_formula("G[0,10] !(inbox(3,5,3,5))", 4);
  REQUIRE(f.kind() == NodeKind::Always);
  REQUIRE(f.child(0).kind() == NodeKind::Not);
  const Formula &box = f.child(0).child(0);
  REQUIRE(box.kind() == NodeKind::And);
  REQUIRE(box.num_children() == 4);
  CHECK(box.child(0).predicate().a.isApprox(unit(4, 0)));
  CHECK(box.child(0).predicate().b == 3.0);
  CHECK(box.child(1).predicate().a.isApprox(unit(4, 0, -1.0)));
  CHECK(box.child(1).predicate().b == -5.0);
}

TEST_CASE("inverted interval is rejected") {
  CHECK_THROWS_AS(parse_formula("F[5,2] (x0 >= 0)", 2), ConfigError);
}

TEST_CASE("syntax errors carry position info") {
  try {
    parse_formula("F[0,5] (x0 >= )", 2);
    FAIL("expected a parse error");
  } catch (const ParseError &e) {
    CHECK(e.line == 1);
    CHECK(e.col > 1);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(parse_formula("x7 >= 1", 4), ConfigError);
  CHECK_THROWS_AS(parse_formula("inbox(0,1,0,1)", 1), ConfigError);
}

TEST_CASE("<= comparisons canonicalize by negation") {
  Formula f = parse_formula("2*x0 - x1 <= 3", 2);
  REQUIRE(f.kind() == NodeKind::Pred);
  Eigen::VectorXd a(2);
  a << -2.0, 1.0;
  CHECK(f.predicate().a.isApprox(a));
  CHECK(f.predicate().b == -3.0);
}

TEST_CASE("until binds through the unary chain") {
  Formula f = parse_formula("!(x0 >= 1) U[0,4] (x0 >= 2)", 1);
  REQUIRE(f.kind() == NodeKind::Until);
  CHECK(f.child(0).kind() == NodeKind::Not);
  CHECK(f.child(1).kind() == NodeKind::Pred);
}

TEST_CASE("pnf pushes negations to predicates") {
  Formula f = parse_formula("!(x0 >= 1 & x1 >= 2)", 2);
  Formula p = to_pnf(f);
  REQUIRE(p.kind() == NodeKind::Or);
  CHECK(p.child(0).kind() == NodeKind::Pred);
  CHECK(p.child(0).predicate().a[0] == -1.0);
  CHECK(p.child(0).predicate().b == -1.0);
  // Double negation vanishes.
  Formula q = to_pnf(Formula::negate(Formula::negate(f.child(0))));
  CHECK(q.kind() == NodeKind::And);
}

TEST_CASE("pnf duality on temporal operators") {
  Formula f = parse_formula("!F[0,3] (x0 >= 1)", 1);
  Formula p = to_pnf(f);
  REQUIRE(p.kind() == NodeKind::Always);
  CHECK(p.child(0).kind() == NodeKind::Pred);
  CHECK(p.child(0).predicate().a[0] == -1.0);
  CHECK_THROWS_AS(to_pnf(parse_formula("!((x0 >= 0) U[0,3] (x0 >= 1))", 1)), ConfigError);
}

TEST_CASE("mra extraction on the two-eventually pattern") {
  Formula f = parse_formula("F[0,6] inbox(4,5,-1,1) & F[0,6] inbox(-5,-4,-1,1)", 2);
  MraExtraction ex = collect_mra_subformulas(f);
  REQUIRE(ex.triples.size() == 2);
  CHECK(ex.triples[0].constraint.kind() == NodeKind::True);
  CHECK(ex.triples[1].constraint.kind() == NodeKind::True);
  CHECK(ex.residual.kind() == NodeKind::True);
}

TEST_CASE("mra extraction keeps always conjuncts in the residual") {
  Formula f = parse_formula("G[0,10] !inbox(3,5,3,5)", 4);
  MraExtraction ex = collect_mra_subformulas(f);
  CHECK(ex.triples.empty());
  CHECK(ex.residual.kind() == NodeKind::Always);
}

TEST_CASE("mra extraction of a mission-style conjunction") {
  // Hold one of two boxes, avoid an obstacle, reach a goal.
  Formula f = parse_formula("F[0,3] ( G[0,5] inbox(2,5,6,9) | G[0,5] inbox(10,13,6,9) ) "
                            "& G[0,8] !inbox(7,9,4,7) & F[0,8] inbox(5,7,3,6)",
                            4);
  MraExtraction ex = collect_mra_subformulas(f);
  REQUIRE(ex.triples.size() == 2);
  CHECK(ex.triples[0].target.kind() == NodeKind::Or);
  CHECK(ex.triples[0].window_hi == 3.0);
  CHECK(ex.triples[1].window_hi == 8.0);
  CHECK(ex.residual.kind() == NodeKind::Always);
}

TEST_CASE("until conjuncts yield constraint-target pairs") {
  Formula f = parse_formula("(!inbox(0,1,0,1)) U[0,9] inbox(2,3,2,3) & G[0,9] (x0 >= -10)", 4);
  MraExtraction ex = collect_mra_subformulas(f);
  REQUIRE(ex.triples.size() == 1);
  // Extraction runs on the positive normal form: the negated box is a
  // disjunction of complement faces.
  CHECK(ex.triples[0].constraint.kind() == NodeKind::Or);
  CHECK(ex.triples[0].target.kind() == NodeKind::And);
}

TEST_CASE("nested eventually below an extracted target is rejected") {
  Formula f = parse_formula("F[0,5] ( F[0,2] (x0 >= 1) )", 1);
  try {
    collect_mra_subformulas(f);
    FAIL("expected an error");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("iterative application") != std::string::npos);
  }
}

TEST_CASE("predicate with zero coefficients is rejected") {
  CHECK_THROWS_AS(parse_formula("x0 - x0 >= 1", 2), ConfigError);
}
