#include "stlreach/errors.hpp"
#include "stlreach/milp.hpp"
#include "stlreach/robustness.hpp"

#include <map>
#include <optional>

namespace stlreach {

namespace {

// Encoding reference: either a constant truth value or a [0,1] variable
// (binary for predicates, continuous for compound nodes).
struct Ref {
  enum Kind { ConstTrue, ConstFalse, Var } kind;
  int var = -1;
};

class Encoder {
public:
  Encoder(const Formula &phi, const LinearSystem &sys, const DiscreteSystem &dsys,
          const Eigen::VectorXd &x0, int N, const ObjectiveSpec &obj)
      : sys_(sys), dsys_(dsys), N_(N) {
    sys_.validate();
    if (N < 0) throw ConfigError("plan horizon must be >= 0");
    if (x0.size() != sys.state_dim()) throw ConfigError("x0 dimension mismatch");
    for (int d = 0; d < sys.state_dim(); ++d)
      if (x0[d] < sys.state_lo[d] - 1e-9 || x0[d] > sys.state_hi[d] + 1e-9)
        throw ConfigError("x0 outside the state bounds");

    plan_.horizon = N;
    plan_.state_dim = sys.state_dim();
    plan_.input_dim = sys.input_dim();
    plan_.dt = dsys.dt;

    const int n = sys.state_dim(), m = sys.input_dim();
    // State variables; step 0 pinned to x0.
    for (int k = 0; k <= N; ++k)
      for (int d = 0; d < n; ++d) {
        double lo = k == 0 ? x0[d] : sys.state_lo[d];
        double hi = k == 0 ? x0[d] : sys.state_hi[d];
        plan_.x_vars.push_back(prob_.add_var(lo, hi, 0.0, false,
                                             "x" + std::to_string(k) + "_" + std::to_string(d)));
      }
    for (int k = 0; k < N; ++k)
      for (int j = 0; j < m; ++j)
        plan_.u_vars.push_back(prob_.add_var(sys.input_lo[j], sys.input_hi[j], 0.0, false,
                                             "u" + std::to_string(k) + "_" + std::to_string(j)));
    // |u| linearization for the effort objective.
    for (int k = 0; k < N; ++k)
      for (int j = 0; j < m; ++j) {
        double umax = std::max(std::abs(sys.input_lo[j]), std::abs(sys.input_hi[j]));
        int w = prob_.add_var(0.0, umax, obj.effort_weight, false,
                              "w" + std::to_string(k) + "_" + std::to_string(j));
        int u = plan_.u_vars[static_cast<std::size_t>(k) * m + j];
        prob_.add_row({{{w, 1.0}, {u, -1.0}}, Rel::GE, 0.0});
        prob_.add_row({{{w, 1.0}, {u, 1.0}}, Rel::GE, 0.0});
      }
    plan_.rho_var = prob_.add_var(0.0, 1e6, -obj.rho_weight, false, "rho");

    // Dynamics equalities x_{k+1} = Ad x_k + Bd u_k.
    for (int k = 0; k < N; ++k)
      for (int d = 0; d < n; ++d) {
        LinRow row;
        row.rel = Rel::EQ;
        row.rhs = 0.0;
        row.terms.push_back({xvar(k + 1, d), 1.0});
        for (int j = 0; j < n; ++j)
          if (dsys.Ad(d, j) != 0.0) row.terms.push_back({xvar(k, j), -dsys.Ad(d, j)});
        for (int j = 0; j < m; ++j)
          if (dsys.Bd(d, j) != 0.0) row.terms.push_back({uvar(k, j), -dsys.Bd(d, j)});
        prob_.add_row(std::move(row));
      }

    Ref root = enc(to_pnf(phi), 0);
    switch (root.kind) {
    case Ref::ConstTrue:
      break;
    case Ref::ConstFalse:
      // Trivially unsatisfiable; encode an impossible row.
      prob_.add_row({{{plan_.rho_var, 0.0}}, Rel::GE, 1.0});
      break;
    case Ref::Var:
      prob_.lo[root.var] = 1.0;
      prob_.hi[root.var] = 1.0;
      break;
    }
  }

  EncodedPlan take() {
    plan_.problem = std::move(prob_);
    return std::move(plan_);
  }

private:
  LinearSystem sys_;
  const DiscreteSystem &dsys_;
  int N_;
  MilpProblem prob_;
  EncodedPlan plan_;
  std::map<std::pair<const void *, int>, Ref> memo_;
  std::map<std::pair<const void *, int>, Ref> pred_memo_;

  int xvar(int k, int d) const {
    return plan_.x_vars[static_cast<std::size_t>(k) * sys_.state_dim() + d];
  }
  int uvar(int k, int j) const {
    return plan_.u_vars[static_cast<std::size_t>(k) * sys_.input_dim() + j];
  }

  std::pair<long, long> window_steps(const Formula &f, int k) const {
    auto [a, b] = window_to_steps(f.window_lo(), f.window_hi(), dsys_.dt);
    long lo = k + a, hi = k + b;
    if (lo > hi)
      throw ConfigError("temporal window encloses no plan step at dt " +
                        std::to_string(dsys_.dt));
    if (hi > N_)
      throw ConfigError("temporal window exceeds the plan horizon (needs step " +
                        std::to_string(hi) + " of " + std::to_string(N_) + ")");
    return {lo, hi};
  }

  // Big-M value per predicate: max |a'x - b| over the state box, plus 1.
  double big_m(const Predicate &p) const {
    double mx = -p.b, mn = -p.b;
    for (int d = 0; d < sys_.state_dim(); ++d) {
      mx += std::max(p.a[d] * sys_.state_lo[d], p.a[d] * sys_.state_hi[d]);
      mn += std::min(p.a[d] * sys_.state_lo[d], p.a[d] * sys_.state_hi[d]);
    }
    return std::max(std::abs(mx), std::abs(mn)) + 1.0;
  }

  Ref pred_ref(const Formula &f, const Predicate &p, int k) {
    auto key = std::make_pair(f.id(), k);
    auto it = pred_memo_.find(key);
    if (it != pred_memo_.end()) return it->second;
    double M = big_m(p);
    int z = prob_.add_var(0.0, 1.0, 0.0, true, "z@" + std::to_string(k));
    // z = 1 => a'x - b >= rho ; z = 0 => a'x - b <= -rho.
    LinRow r1; // a'x - rho - M z >= b - M
    for (int d = 0; d < sys_.state_dim(); ++d)
      if (p.a[d] != 0.0) r1.terms.push_back({xvar(k, d), p.a[d]});
    r1.terms.push_back({plan_.rho_var, -1.0});
    r1.terms.push_back({z, -M});
    r1.rel = Rel::GE;
    r1.rhs = p.b - M;
    prob_.add_row(std::move(r1));
    LinRow r2; // a'x + rho - M z <= b
    for (int d = 0; d < sys_.state_dim(); ++d)
      if (p.a[d] != 0.0) r2.terms.push_back({xvar(k, d), p.a[d]});
    r2.terms.push_back({plan_.rho_var, 1.0});
    r2.terms.push_back({z, -M});
    r2.rel = Rel::LE;
    r2.rhs = p.b;
    prob_.add_row(std::move(r2));
    Ref ref{Ref::Var, z};
    pred_memo_[key] = ref;
    return ref;
  }

  Ref combine(std::vector<Ref> kids, bool is_and, int k) {
    std::vector<int> vars;
    for (const Ref &r : kids) {
      if (r.kind == Ref::ConstTrue) {
        if (!is_and) return {Ref::ConstTrue, -1};
        continue;
      }
      if (r.kind == Ref::ConstFalse) {
        if (is_and) return {Ref::ConstFalse, -1};
        continue;
      }
      vars.push_back(r.var);
    }
    if (vars.empty()) return {is_and ? Ref::ConstTrue : Ref::ConstFalse, -1};
    if (vars.size() == 1) return {Ref::Var, vars[0]};
    int z = prob_.add_var(0.0, 1.0, 0.0, false,
                          std::string(is_and ? "and@" : "or@") + std::to_string(k));
    if (is_and) {
      LinRow sum; // z >= 1 - q + sum z_i
      sum.terms.push_back({z, 1.0});
      for (int v : vars) {
        prob_.add_row({{{z, 1.0}, {v, -1.0}}, Rel::LE, 0.0});
        sum.terms.push_back({v, -1.0});
      }
      sum.rel = Rel::GE;
      sum.rhs = 1.0 - static_cast<double>(vars.size());
      prob_.add_row(std::move(sum));
    } else {
      LinRow sum; // z <= sum z_i
      sum.terms.push_back({z, 1.0});
      for (int v : vars) {
        prob_.add_row({{{v, 1.0}, {z, -1.0}}, Rel::LE, 0.0}); // z_i <= z
        sum.terms.push_back({v, -1.0});
      }
      sum.rel = Rel::LE;
      sum.rhs = 0.0;
      prob_.add_row(std::move(sum));
    }
    return {Ref::Var, z};
  }

  Ref conj2(Ref a, Ref b, int k) { return combine({a, b}, true, k); }

  Ref enc(const Formula &f, int k) {
    auto key = std::make_pair(f.id(), k);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Ref out;
    switch (f.kind()) {
    case NodeKind::True:
      out = {Ref::ConstTrue, -1};
      break;
    case NodeKind::Pred:
      out = pred_ref(f, f.predicate(), k);
      break;
    case NodeKind::Not: {
      // PNF leaves negation only on predicates.
      if (f.child(0).kind() != NodeKind::Pred)
        throw ConfigError("encoder expects positive normal form");
      out = pred_ref(f, f.child(0).predicate().negated(), k);
      break;
    }
    case NodeKind::And:
    case NodeKind::Or: {
      std::vector<Ref> kids;
      kids.reserve(f.num_children());
      for (const auto &c : f.children()) kids.push_back(enc(c, k));
      out = combine(std::move(kids), f.kind() == NodeKind::And, k);
      break;
    }
    case NodeKind::Eventually:
    case NodeKind::Always: {
      auto [lo, hi] = window_steps(f, k);
      std::vector<Ref> kids;
      for (long j = lo; j <= hi; ++j) kids.push_back(enc(f.child(0), static_cast<int>(j)));
      out = combine(std::move(kids), f.kind() == NodeKind::Always, k);
      break;
    }
    case NodeKind::Until: {
      // Disjunction over switch times of (phi2 at j) & (phi1 on [k, j]).
      auto [lo, hi] = window_steps(f, k);
      Ref prefix{Ref::ConstTrue, -1};
      for (long j = k; j < lo; ++j)
        prefix = conj2(prefix, enc(f.child(0), static_cast<int>(j)), static_cast<int>(j));
      std::vector<Ref> branches;
      for (long j = lo; j <= hi; ++j) {
        prefix = conj2(prefix, enc(f.child(0), static_cast<int>(j)), static_cast<int>(j));
        branches.push_back(
            conj2(enc(f.child(1), static_cast<int>(j)), prefix, static_cast<int>(j)));
      }
      out = combine(std::move(branches), false, k);
      break;
    }
    }
    memo_[key] = out;
    return out;
  }
};

} // namespace

Trajectory EncodedPlan::extract_trajectory(const std::vector<double> &x) const {
  Trajectory t;
  t.dt = dt;
  t.t0 = 0.0;
  for (int k = 0; k <= horizon; ++k) {
    Eigen::VectorXd s(state_dim);
    for (int d = 0; d < state_dim; ++d)
      s[d] = x[x_vars[static_cast<std::size_t>(k) * state_dim + d]];
    t.states.push_back(std::move(s));
  }
  for (int k = 0; k < horizon; ++k) {
    Eigen::VectorXd u(input_dim);
    for (int j = 0; j < input_dim; ++j)
      u[j] = x[u_vars[static_cast<std::size_t>(k) * input_dim + j]];
    t.inputs.push_back(std::move(u));
  }
  return t;
}

EncodedPlan encode(const Formula &phi, const LinearSystem &sys, const DiscreteSystem &dsys,
                   const Eigen::VectorXd &x0, int N, const ObjectiveSpec &objective) {
  Encoder e(phi, sys, dsys, x0, N, objective);
  return e.take();
}

} // namespace stlreach
