#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

namespace stlreach {

// Atomic predicate in canonical form: satisfied iff a'x - b >= 0.
// "<=" comparisons are negated into this form at parse time.
struct Predicate {
  Eigen::VectorXd a;
  double b = 0.0;

  Predicate() = default;
  Predicate(Eigen::VectorXd a_, double b_);

  double margin(const Eigen::VectorXd &x) const { return a.dot(x) - b; }
  Predicate negated() const { return Predicate(-a, -b); }
};

enum class NodeKind { True, Pred, Not, And, Or, Until, Eventually, Always };

// Immutable formula handle. Temporal windows are in seconds.
class Formula {
public:
  Formula() = default;

  static Formula truth();
  static Formula pred(Predicate p);
  static Formula negate(Formula f);
  static Formula conj(std::vector<Formula> children);
  static Formula disj(std::vector<Formula> children);
  static Formula until(double lo, double hi, Formula left, Formula right);
  static Formula eventually(double lo, double hi, Formula child);
  static Formula always(double lo, double hi, Formula child);

  bool valid() const { return node_ != nullptr; }
  NodeKind kind() const;
  const Predicate &predicate() const;
  double window_lo() const;
  double window_hi() const;
  const std::vector<Formula> &children() const;
  const Formula &child(std::size_t i) const;
  std::size_t num_children() const;

  // State dimension inferred from predicates; 0 if no predicate occurs.
  int state_dim() const;
  // True if no Until/Eventually node occurs anywhere in the tree.
  bool reach_free() const;
  // True if no temporal operator occurs at all (pure state formula).
  bool temporal_free() const;

  std::string to_string() const;

  // Stable node identity for memoization keys.
  const void *id() const { return node_.get(); }

private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Positive normal form: negations pushed down to predicates, double
// negations removed, derived operators kept explicit. Negating an Until
// has no dual in this AST and is rejected.
Formula to_pnf(const Formula &f);

struct MraTriple {
  Formula target;     // phi2 of the until (or the eventually child)
  Formula constraint; // phi1 of the until; True for eventually
  double window_lo = 0.0;
  double window_hi = 0.0;
};

struct MraExtraction {
  std::vector<MraTriple> triples;
  Formula residual; // conjunction of remaining top-level conjuncts (True if none)
};

// Collects top-level Eventually/Until conjuncts as target/constraint/window
// triples; everything else becomes the residual conjunction. Nested
// Eventually/Until below non-conjunctive structure is rejected with
// "requires iterative application".
MraExtraction collect_mra_subformulas(const Formula &phi);

} // namespace stlreach
