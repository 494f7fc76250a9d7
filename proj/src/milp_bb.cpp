#include "simplex_impl.hpp"
#include "stlreach/errors.hpp"
#include "stlreach/milp.hpp"
#include "stlreach/robustness.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace stlreach {

namespace {

struct Fixing {
  int var;
  double lo, hi;
};

struct Node {
  double bound;
  long id;
  std::vector<Fixing> fixings;
  std::shared_ptr<detail::Simplex::BasisSnapshot> basis;
};

struct NodeOrder {
  bool operator()(const Node &a, const Node &b) const {
    if (a.bound != b.bound) return a.bound > b.bound; // min-heap on bound
    return a.id > b.id;
  }
};

constexpr double kIntTol = 1e-6;

int most_fractional(const MilpProblem &p, const std::vector<double> &x) {
  int best = -1;
  double best_frac = kIntTol;
  for (int j = 0; j < p.num_vars(); ++j) {
    if (!p.is_binary[j]) continue;
    double f = std::min(std::abs(x[j]), std::abs(1.0 - x[j]));
    if (f > best_frac) {
      best_frac = f;
      best = j;
    }
  }
  return best;
}

} // namespace

MilpResult solve_milp(const MilpProblem &p, const MilpOptions &opt) {
  MilpResult out;
  detail::Simplex sx(p);

  auto apply_bounds = [&](const std::vector<Fixing> &fixings) {
    for (int j = 0; j < p.num_vars(); ++j)
      if (p.is_binary[j]) sx.set_var_bound(j, p.lo[j], p.hi[j]);
    for (const auto &f : fixings) sx.set_var_bound(f.var, f.lo, f.hi);
  };

  LpStatus root = sx.solve_primal();
  out.lp_iterations = sx.iterations();
  out.nodes = 1;
  if (root == LpStatus::Infeasible) {
    out.status = MilpStatus::Infeasible;
    out.gap = 0.0;
    return out;
  }
  if (root == LpStatus::Unbounded)
    throw NumericalError("MILP relaxation unbounded; problem is missing bounds");

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 1;
  double incumbent = std::numeric_limits<double>::infinity();
  bool have_incumbent = false;

  auto prune_bound = [&](double bound) {
    return have_incumbent &&
           bound >= incumbent - opt.gap * std::max(1.0, std::abs(incumbent));
  };

  // Plunge state: the simplex currently holds this node's optimal basis.
  bool plunging = true;
  std::vector<Fixing> plunge_fixings;
  double plunge_bound = sx.objective();

  std::vector<double> x;
  bool done = false;
  while (!done) {
    double node_bound;
    std::vector<Fixing> node_fixings;
    if (plunging) {
      node_bound = plunge_bound;
      node_fixings = plunge_fixings;
    } else {
      if (open.empty()) break;
      Node nd = open.top();
      open.pop();
      if (prune_bound(nd.bound)) continue;
      apply_bounds(nd.fixings);
      sx.restore(*nd.basis);
      long it0 = sx.iterations();
      LpStatus st = sx.reoptimize_dual();
      out.lp_iterations += sx.iterations() - it0;
      ++out.nodes;
      if (out.nodes >= opt.node_limit) done = true;
      if (st == LpStatus::Infeasible) continue;
      if (st == LpStatus::Unbounded)
        throw NumericalError("MILP subproblem relaxation unbounded");
      node_bound = sx.objective();
      node_fixings = nd.fixings;
      if (prune_bound(node_bound)) continue;
    }

    sx.get_solution(x);
    int branch_var = most_fractional(p, x);
    if (branch_var < 0) {
      // Integral: candidate incumbent.
      double obj = node_bound;
      if (!have_incumbent || obj < incumbent) {
        incumbent = obj;
        have_incumbent = true;
        out.x = x;
        out.objective = obj;
        if (opt.stop_at_first_incumbent) {
          out.status = MilpStatus::FeasibleAtLimit;
          out.bound = open.empty() ? incumbent : std::min(incumbent, open.top().bound);
          out.gap = incumbent == out.bound ? 0.0
                                           : std::abs(incumbent - out.bound) /
                                                 std::max(1.0, std::abs(incumbent));
          return out;
        }
      }
      plunging = false;
      continue;
    }

    // Branch: plunge into the rounding-preferred child, queue the sibling.
    double frac = x[branch_var];
    bool up_first = frac >= 0.5;
    Node sibling;
    sibling.bound = node_bound;
    sibling.id = next_id++;
    sibling.fixings = node_fixings;
    sibling.fixings.push_back(up_first ? Fixing{branch_var, 0.0, 0.0}
                                       : Fixing{branch_var, 1.0, 1.0});
    sibling.basis = std::make_shared<detail::Simplex::BasisSnapshot>(sx.snapshot());
    open.push(std::move(sibling));

    plunge_fixings = node_fixings;
    plunge_fixings.push_back(up_first ? Fixing{branch_var, 1.0, 1.0}
                                      : Fixing{branch_var, 0.0, 0.0});
    sx.set_var_bound(branch_var, up_first ? 1.0 : 0.0, up_first ? 1.0 : 0.0);
    long it0 = sx.iterations();
    LpStatus st = sx.reoptimize_dual();
    out.lp_iterations += sx.iterations() - it0;
    ++out.nodes;
    if (out.nodes >= opt.node_limit) done = true;
    if (st == LpStatus::Infeasible) {
      plunging = false;
      continue;
    }
    if (st == LpStatus::Unbounded)
      throw NumericalError("MILP subproblem relaxation unbounded");
    plunge_bound = sx.objective();
    if (prune_bound(plunge_bound)) {
      plunging = false;
      continue;
    }
    plunging = true;
  }

  // Exhausted the tree or hit the node limit.
  double best_open = std::numeric_limits<double>::infinity();
  if (!open.empty()) best_open = open.top().bound;
  if (have_incumbent) {
    out.bound = std::min(incumbent, best_open);
    bool exhausted = open.empty() || prune_bound(best_open);
    if (done && !exhausted) {
      out.status = MilpStatus::FeasibleAtLimit;
      out.gap = std::abs(incumbent - out.bound) / std::max(1.0, std::abs(incumbent));
    } else {
      out.status = MilpStatus::Optimal;
      out.gap = 0.0;
    }
    out.objective = incumbent;
  } else if (done && !open.empty()) {
    out.status = MilpStatus::Indeterminate;
    out.bound = best_open;
  } else {
    out.status = MilpStatus::Infeasible;
    out.gap = 0.0;
  }
  return out;
}

std::optional<PlanResult> plan(const Formula &phi, const LinearSystem &sys, double dt,
                               const Eigen::VectorXd &x0, int N,
                               const ObjectiveSpec &objective, const MilpOptions &opt) {
  auto t_start = std::chrono::steady_clock::now();
  DiscreteSystem dsys = discretize(sys, dt);
  EncodedPlan ep = encode(phi, sys, dsys, x0, N, objective);
  MilpResult res = solve_milp(ep.problem, opt);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (res.status == MilpStatus::Infeasible) return std::nullopt;
  if (res.status == MilpStatus::Indeterminate)
    throw NumericalError("branch and bound node limit exhausted without an incumbent");

  PlanResult pr;
  pr.trajectory = ep.extract_trajectory(res.x);
  pr.rho = res.x[ep.rho_var];
  pr.objective = res.objective;
  pr.stats.nodes = res.nodes;
  pr.stats.lp_iterations = res.lp_iterations;
  pr.stats.wall_s = wall;
  pr.stats.gap = res.gap;

  double check = robustness(pr.trajectory, 0, phi);
  if (check < -1e-6)
    throw NumericalError("internal error: planned trajectory violates the formula "
                         "(robustness " + std::to_string(check) + "); encoding bug");
  return pr;
}

} // namespace stlreach
