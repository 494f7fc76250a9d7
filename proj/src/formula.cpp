#include "stlreach/formula.hpp"

#include "stlreach/errors.hpp"

#include <sstream>

namespace stlreach {

Predicate::Predicate(Eigen::VectorXd a_, double b_) : a(std::move(a_)), b(b_) {
  if (a.size() == 0 || a.isZero(0.0))
    throw ConfigError("predicate coefficient vector must be nonzero");
}

struct Formula::Node {
  NodeKind kind;
  Predicate pred;
  double lo = 0.0, hi = 0.0;
  std::vector<Formula> children;
};

namespace {
void check_window(double lo, double hi) {
  if (lo < 0.0 || hi < lo)
    throw ConfigError("temporal window must satisfy 0 <= lo <= hi, got [" +
                      std::to_string(lo) + "," + std::to_string(hi) + "]");
}
} // namespace

Formula Formula::truth() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::True;
  return Formula(std::move(n));
}

Formula Formula::pred(Predicate p) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Pred;
  n->pred = std::move(p);
  return Formula(std::move(n));
}

Formula Formula::negate(Formula f) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Not;
  n->children = {std::move(f)};
  return Formula(std::move(n));
}

Formula Formula::conj(std::vector<Formula> children) {
  if (children.size() < 2)
    throw ConfigError("conjunction needs at least 2 children");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::And;
  n->children = std::move(children);
  return Formula(std::move(n));
}

Formula Formula::disj(std::vector<Formula> children) {
  if (children.size() < 2)
    throw ConfigError("disjunction needs at least 2 children");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Or;
  n->children = std::move(children);
  return Formula(std::move(n));
}

Formula Formula::until(double lo, double hi, Formula left, Formula right) {
  check_window(lo, hi);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Until;
  n->lo = lo;
  n->hi = hi;
  n->children = {std::move(left), std::move(right)};
  return Formula(std::move(n));
}

Formula Formula::eventually(double lo, double hi, Formula child) {
  check_window(lo, hi);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Eventually;
  n->lo = lo;
  n->hi = hi;
  n->children = {std::move(child)};
  return Formula(std::move(n));
}

Formula Formula::always(double lo, double hi, Formula child) {
  check_window(lo, hi);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Always;
  n->lo = lo;
  n->hi = hi;
  n->children = {std::move(child)};
  return Formula(std::move(n));
}

NodeKind Formula::kind() const { return node_->kind; }
const Predicate &Formula::predicate() const { return node_->pred; }
double Formula::window_lo() const { return node_->lo; }
double Formula::window_hi() const { return node_->hi; }
const std::vector<Formula> &Formula::children() const { return node_->children; }
const Formula &Formula::child(std::size_t i) const { return node_->children.at(i); }
std::size_t Formula::num_children() const { return node_->children.size(); }

int Formula::state_dim() const {
  if (kind() == NodeKind::Pred) return static_cast<int>(predicate().a.size());
  for (const auto &c : node_->children) {
    int d = c.state_dim();
    if (d > 0) return d;
  }
  return 0;
}

bool Formula::reach_free() const {
  if (kind() == NodeKind::Until || kind() == NodeKind::Eventually) return false;
  for (const auto &c : node_->children)
    if (!c.reach_free()) return false;
  return true;
}

bool Formula::temporal_free() const {
  switch (kind()) {
  case NodeKind::Until:
  case NodeKind::Eventually:
  case NodeKind::Always:
    return false;
  default:
    break;
  }
  for (const auto &c : node_->children)
    if (!c.temporal_free()) return false;
  return true;
}

namespace {
std::string window_str(double lo, double hi) {
  std::ostringstream os;
  os << "[" << lo << "," << hi << "]";
  return os.str();
}
} // namespace

std::string Formula::to_string() const {
  std::ostringstream os;
  switch (kind()) {
  case NodeKind::True:
    return "true";
  case NodeKind::Pred: {
    const auto &p = predicate();
    bool first = true;
    for (int i = 0; i < p.a.size(); ++i) {
      if (p.a[i] == 0.0) continue;
      if (!first) os << (p.a[i] > 0 ? " + " : " - ");
      else if (p.a[i] < 0) os << "-";
      double c = std::abs(p.a[i]);
      if (c != 1.0) os << c << "*";
      os << "x" << i;
      first = false;
    }
    os << " >= " << p.b;
    return "(" + os.str() + ")";
  }
  case NodeKind::Not:
    return "!" + child(0).to_string();
  case NodeKind::And:
  case NodeKind::Or: {
    const char *sep = kind() == NodeKind::And ? " & " : " | ";
    os << "(";
    for (std::size_t i = 0; i < num_children(); ++i) {
      if (i) os << sep;
      os << child(i).to_string();
    }
    os << ")";
    return os.str();
  }
  case NodeKind::Until:
    return "(" + child(0).to_string() + " U" + window_str(window_lo(), window_hi()) +
           " " + child(1).to_string() + ")";
  case NodeKind::Eventually:
    return "F" + window_str(window_lo(), window_hi()) + " " + child(0).to_string();
  case NodeKind::Always:
    return "G" + window_str(window_lo(), window_hi()) + " " + child(0).to_string();
  }
  return "?";
}

namespace {

Formula push_neg(const Formula &f, bool negated) {
  switch (f.kind()) {
  case NodeKind::True:
    if (!negated) return f;
    throw ConfigError("cannot negate 'true' into positive normal form "
                      "(no 'false' node)");
  case NodeKind::Pred:
    return negated ? Formula::pred(f.predicate().negated()) : f;
  case NodeKind::Not:
    return push_neg(f.child(0), !negated);
  case NodeKind::And:
  case NodeKind::Or: {
    std::vector<Formula> kids;
    kids.reserve(f.num_children());
    for (const auto &c : f.children()) kids.push_back(push_neg(c, negated));
    bool make_and = (f.kind() == NodeKind::And) != negated;
    return make_and ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
  }
  case NodeKind::Eventually: {
    Formula c = push_neg(f.child(0), negated);
    return negated ? Formula::always(f.window_lo(), f.window_hi(), c)
                   : Formula::eventually(f.window_lo(), f.window_hi(), c);
  }
  case NodeKind::Always: {
    Formula c = push_neg(f.child(0), negated);
    return negated ? Formula::eventually(f.window_lo(), f.window_hi(), c)
                   : Formula::always(f.window_lo(), f.window_hi(), c);
  }
  case NodeKind::Until: {
    if (negated)
      throw ConfigError("negated 'until' has no positive normal form in this "
                        "fragment (no release operator)");
    return Formula::until(f.window_lo(), f.window_hi(), push_neg(f.child(0), false),
                          push_neg(f.child(1), false));
  }
  }
  throw ConfigError("unreachable formula kind");
}

void flatten_conjuncts(const Formula &f, std::vector<Formula> &out) {
  if (f.kind() == NodeKind::And) {
    for (const auto &c : f.children()) flatten_conjuncts(c, out);
  } else {
    out.push_back(f);
  }
}

} // namespace

Formula to_pnf(const Formula &f) { return push_neg(f, false); }

MraExtraction collect_mra_subformulas(const Formula &phi) {
  Formula p = to_pnf(phi);
  std::vector<Formula> conjuncts;
  flatten_conjuncts(p, conjuncts);

  MraExtraction out;
  std::vector<Formula> residual;
  for (const auto &c : conjuncts) {
    if (c.kind() == NodeKind::Eventually) {
      if (!c.child(0).reach_free())
        throw ConfigError("nested eventually/until inside an extracted target: "
                          "requires iterative application");
      out.triples.push_back({c.child(0), Formula::truth(), c.window_lo(), c.window_hi()});
    } else if (c.kind() == NodeKind::Until) {
      if (!c.child(0).reach_free() || !c.child(1).reach_free())
        throw ConfigError("nested eventually/until inside an extracted "
                          "target/constraint: requires iterative application");
      out.triples.push_back({c.child(1), c.child(0), c.window_lo(), c.window_hi()});
    } else {
      if (!c.reach_free())
        throw ConfigError("eventually/until below non-conjunctive structure: "
                          "requires iterative application");
      residual.push_back(c);
    }
  }
  if (residual.empty())
    out.residual = Formula::truth();
  else if (residual.size() == 1)
    out.residual = residual[0];
  else
    out.residual = Formula::conj(std::move(residual));
  return out;
}

} // namespace stlreach
