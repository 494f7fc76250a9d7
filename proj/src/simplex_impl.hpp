#pragma once

// Bounded-variable revised simplex with a dense basis inverse: two-phase
// primal (artificial start) and a dual reoptimization path for branch and
// bound warm starts. Internal to the milp module.

#include "stlreach/errors.hpp"
#include "stlreach/milp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace stlreach::detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Simplex {
public:
  static constexpr signed char BASIC = 0, AT_LO = 1, AT_UP = 2, NB_FREE = 3;

  struct BasisSnapshot {
    std::vector<int> basic;
    std::vector<signed char> stat;
  };

  explicit Simplex(const MilpProblem &p) : n_(p.num_vars()), m_(static_cast<int>(p.rows.size())) {
    total_ = n_ + m_ + m_; // structural, slack, artificial
    cols_.resize(total_);
    lo_.assign(total_, 0.0);
    hi_.assign(total_, 0.0);
    cost_.assign(total_, 0.0);
    rhs_.resize(m_);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = p.lo[j];
      hi_[j] = p.hi[j];
      cost_[j] = p.objective[j];
    }
    for (int i = 0; i < m_; ++i) {
      const LinRow &row = p.rows[i];
      for (auto [v, c] : row.terms)
        if (c != 0.0) cols_[v].push_back({i, c});
      int s = n_ + i;
      cols_[s].push_back({i, 1.0});
      switch (row.rel) {
      case Rel::LE: lo_[s] = 0.0; hi_[s] = kInf; break;
      case Rel::GE: lo_[s] = -kInf; hi_[s] = 0.0; break;
      case Rel::EQ: lo_[s] = 0.0; hi_[s] = 0.0; break;
      }
      rhs_[i] = row.rhs;
      int a = n_ + m_ + i;
      cols_[a].push_back({i, 1.0}); // sign adjusted at activation
      lo_[a] = 0.0;
      hi_[a] = 0.0;
    }
    stat_.assign(total_, AT_LO);
    basic_.assign(m_, -1);
    basic_pos_.assign(total_, -1);
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xb_ = Eigen::VectorXd::Zero(m_);
  }

  void set_var_bound(int j, double lo, double hi) {
    lo_[j] = lo;
    hi_[j] = hi;
  }

  double var_lo(int j) const { return lo_[j]; }
  double var_hi(int j) const { return hi_[j]; }

  LpStatus solve_primal() {
    build_initial_basis();
    if (any_artificial_active_) {
      LpStatus s1 = run_primal(true);
      if (s1 == LpStatus::Unbounded)
        throw NumericalError("phase-1 unbounded: numerical breakdown");
      double infeas = phase1_objective();
      if (infeas > 1e-7) return LpStatus::Infeasible;
      deactivate_artificials();
    }
    return run_primal(false);
  }

  // Dual reoptimization after bound tightening; the stored basis stays dual
  // feasible because costs are unchanged. Returns Optimal or Infeasible.
  LpStatus reoptimize_dual() {
    clamp_nonbasic_to_bounds();
    recompute_xb();
    long guard = 0;
    for (;;) {
      if (++guard > 200000) throw NumericalError("dual simplex iteration limit");
      int row = most_violated_row();
      if (row < 0) {
        // Primal feasible again; polish reduced costs with a primal cleanup
        // pass in case bound flips changed the optimal vertex.
        return run_primal(false);
      }
      if (!dual_pivot(row)) return LpStatus::Infeasible;
      ++iterations_;
      if (iterations_ % refactor_interval_ == 0) refactorize();
    }
  }

  double objective() const {
    double v = 0.0;
    for (int j = 0; j < n_; ++j) v += cost_[j] * value(j);
    return v;
  }

  void get_solution(std::vector<double> &x) const {
    x.resize(n_);
    for (int j = 0; j < n_; ++j) x[j] = value(j);
  }

  long iterations() const { return iterations_; }

  BasisSnapshot snapshot() const { return {basic_, stat_}; }

  void restore(const BasisSnapshot &s) {
    basic_ = s.basic;
    stat_ = s.stat;
    basic_pos_.assign(total_, -1);
    for (int i = 0; i < m_; ++i) basic_pos_[basic_[i]] = i;
    refactorize();
  }

private:
  int n_, m_, total_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lo_, hi_, cost_;
  Eigen::VectorXd rhs_;
  std::vector<signed char> stat_;
  std::vector<int> basic_;      // row -> variable
  std::vector<int> basic_pos_;  // variable -> row (or -1)
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  std::vector<double> art_sign_;
  bool any_artificial_active_ = false;
  long iterations_ = 0;
  int refactor_interval_ = 400;
  static constexpr double feas_tol_ = 1e-7;
  static constexpr double cost_tol_ = 1e-9;
  static constexpr double pivot_tol_ = 1e-9;

  double nb_value(int j) const {
    switch (stat_[j]) {
    case AT_LO: return lo_[j];
    case AT_UP: return hi_[j];
    default: return 0.0;
    }
  }

  double value(int j) const {
    return stat_[j] == BASIC ? xb_[basic_pos_[j]] : nb_value(j);
  }

  void clamp_nonbasic_to_bounds() {
    // After bound tightening a nonbasic variable may sit at a stale bound
    // value; snap it to the surviving bound.
    for (int j = 0; j < total_; ++j) {
      if (stat_[j] == BASIC) continue;
      if (stat_[j] == AT_LO && !std::isfinite(lo_[j])) stat_[j] = std::isfinite(hi_[j]) ? AT_UP : NB_FREE;
      if (stat_[j] == AT_UP && !std::isfinite(hi_[j])) stat_[j] = std::isfinite(lo_[j]) ? AT_LO : NB_FREE;
    }
  }

  void build_initial_basis() {
    art_sign_.assign(m_, 1.0);
    any_artificial_active_ = false;
    // Nonbasic structurals at the finite bound nearest zero.
    for (int j = 0; j < n_ + m_; ++j) {
      if (std::isfinite(lo_[j]) && std::isfinite(hi_[j]))
        stat_[j] = std::abs(lo_[j]) <= std::abs(hi_[j]) ? AT_LO : AT_UP;
      else if (std::isfinite(lo_[j]))
        stat_[j] = AT_LO;
      else if (std::isfinite(hi_[j]))
        stat_[j] = AT_UP;
      else
        stat_[j] = NB_FREE;
    }
    // Residual each slack would need to absorb.
    Eigen::VectorXd r = rhs_;
    for (int j = 0; j < n_; ++j) {
      double v = nb_value(j);
      if (v != 0.0)
        for (auto [i, c] : cols_[j]) r[i] -= c * v;
    }
    basic_pos_.assign(total_, -1);
    for (int i = 0; i < m_; ++i) {
      int s = n_ + i;
      int a = n_ + m_ + i;
      cost_[a] = 0.0;
      lo_[a] = 0.0;
      hi_[a] = 0.0;
      if (r[i] >= lo_[s] - feas_tol_ && r[i] <= hi_[s] + feas_tol_) {
        basic_[i] = s;
        stat_[s] = BASIC;
      } else {
        // Slack pinned at its nearest bound, artificial absorbs the rest.
        stat_[s] = r[i] > hi_[s] ? AT_UP : AT_LO;
        double resid = r[i] - nb_value(s);
        art_sign_[i] = resid >= 0.0 ? 1.0 : -1.0;
        cols_[a].clear();
        cols_[a].push_back({i, art_sign_[i]});
        hi_[a] = kInf;
        basic_[i] = a;
        stat_[a] = BASIC;
        any_artificial_active_ = true;
      }
      basic_pos_[basic_[i]] = i;
    }
    refactorize();
  }

  void deactivate_artificials() {
    for (int i = 0; i < m_; ++i) {
      int a = n_ + m_ + i;
      hi_[a] = 0.0;
      cost_[a] = 0.0;
      if (stat_[a] != BASIC) stat_[a] = AT_LO;
    }
  }

  double phase1_objective() const {
    double v = 0.0;
    for (int i = 0; i < m_; ++i) {
      int a = n_ + m_ + i;
      if (stat_[a] == BASIC) v += std::abs(xb_[basic_pos_[a]]);
    }
    return v;
  }

  double phase_cost(int j, bool phase1) const {
    if (phase1) return j >= n_ + m_ ? 1.0 : 0.0;
    return j >= n_ + m_ ? 0.0 : cost_[j];
  }

  void refactorize() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (auto [r, c] : cols_[basic_[i]]) B(r, i) = c;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    // PartialPivLU has no rank query; detect breakdown via the solution.
    binv_ = lu.inverse();
    if (!binv_.allFinite())
      throw NumericalError("singular basis: numerical breakdown in simplex");
    recompute_xb();
  }

  void recompute_xb() {
    Eigen::VectorXd r = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (stat_[j] == BASIC) continue;
      double v = nb_value(j);
      if (v != 0.0)
        for (auto [i, c] : cols_[j]) r[i] -= c * v;
    }
    xb_ = binv_ * r;
  }

  Eigen::VectorXd ftran(int q) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
    for (auto [i, c] : cols_[q]) w += c * binv_.col(i);
    return w;
  }

  // Reduced costs for all nonbasic variables.
  void reduced_costs(bool phase1, std::vector<double> &d) const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = phase_cost(basic_[i], phase1);
    Eigen::VectorXd y = binv_.transpose() * cb;
    d.assign(total_, 0.0);
    for (int j = 0; j < total_; ++j) {
      if (stat_[j] == BASIC) continue;
      double v = phase_cost(j, phase1);
      for (auto [i, c] : cols_[j]) v -= y[i] * c;
      d[j] = v;
    }
  }

  bool movable(int j) const {
    if (stat_[j] == NB_FREE) return true;
    return hi_[j] - lo_[j] > 0.0;
  }

  LpStatus run_primal(bool phase1) {
    std::vector<double> d;
    int degenerate_streak = 0;
    long guard = 0;
    for (;;) {
      if (++guard > 500000) throw NumericalError("primal simplex iteration limit");
      reduced_costs(phase1, d);
      bool bland = degenerate_streak > 60;
      int q = -1;
      double best = cost_tol_;
      int dir = +1;
      for (int j = 0; j < total_; ++j) {
        if (stat_[j] == BASIC || !movable(j)) continue;
        double dj = d[j];
        int cand_dir = 0;
        double score = 0.0;
        if ((stat_[j] == AT_LO || stat_[j] == NB_FREE) && dj < -cost_tol_) {
          cand_dir = +1;
          score = -dj;
        } else if ((stat_[j] == AT_UP || stat_[j] == NB_FREE) && dj > cost_tol_) {
          cand_dir = -1;
          score = dj;
        }
        if (!cand_dir) continue;
        if (bland) {
          q = j;
          dir = cand_dir;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
          dir = cand_dir;
        }
      }
      if (q < 0) return LpStatus::Optimal;

      Eigen::VectorXd w = ftran(q);
      // Ratio test: how far can x_q move in direction dir.
      double span = hi_[q] - lo_[q];
      double t_best = stat_[q] == NB_FREE ? kInf : span;
      int leave_row = -1;
      double leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        double wi = dir * w[i];
        int b = basic_[i];
        if (wi > pivot_tol_) {
          if (!std::isfinite(lo_[b])) continue;
          double t = (xb_[i] - lo_[b]) / wi;
          if (t < t_best - 1e-12 ||
              (t < t_best + 1e-12 &&
               (leave_row < 0 || (bland ? b < basic_[leave_row]
                                        : std::abs(wi) > std::abs(dir * w[leave_row]))))) {
            t_best = std::max(t, 0.0);
            leave_row = i;
            leave_to_upper = false;
          }
        } else if (wi < -pivot_tol_) {
          if (!std::isfinite(hi_[b])) continue;
          double t = (xb_[i] - hi_[b]) / wi;
          if (t < t_best - 1e-12 ||
              (t < t_best + 1e-12 &&
               (leave_row < 0 || (bland ? b < basic_[leave_row]
                                        : std::abs(wi) > std::abs(dir * w[leave_row]))))) {
            t_best = std::max(t, 0.0);
            leave_row = i;
            leave_to_upper = true;
          }
        }
      }
      if (!std::isfinite(t_best)) return LpStatus::Unbounded;

      if (t_best < 1e-11) ++degenerate_streak;
      else degenerate_streak = 0;

      if (leave_row < 0) {
        // Bound flip: q runs to its opposite bound.
        xb_ -= (dir * t_best) * w;
        stat_[q] = dir > 0 ? AT_UP : AT_LO;
      } else {
        double new_q_value;
        if (stat_[q] == AT_LO) new_q_value = lo_[q] + dir * t_best;
        else if (stat_[q] == AT_UP) new_q_value = hi_[q] + dir * t_best;
        else new_q_value = dir * t_best;
        xb_ -= (dir * t_best) * w;
        int leaving = basic_[leave_row];
        stat_[leaving] = leave_to_upper ? AT_UP : AT_LO;
        basic_pos_[leaving] = -1;
        basic_[leave_row] = q;
        basic_pos_[q] = leave_row;
        stat_[q] = BASIC;
        update_binv(w, leave_row);
        xb_[leave_row] = new_q_value;
      }
      ++iterations_;
      if (iterations_ % refactor_interval_ == 0) refactorize();
    }
  }

  void update_binv(const Eigen::VectorXd &w, int row) {
    double piv = w[row];
    if (std::abs(piv) < 1e-12)
      throw NumericalError("zero pivot: numerical breakdown in simplex");
    Eigen::RowVectorXd prow = binv_.row(row) / piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      double f = w[i];
      if (f != 0.0) binv_.row(i) -= f * prow;
    }
    binv_.row(row) = prow;
  }

  int most_violated_row() const {
    int row = -1;
    double worst = feas_tol_;
    for (int i = 0; i < m_; ++i) {
      int b = basic_[i];
      double v = 0.0;
      if (xb_[i] < lo_[b]) v = lo_[b] - xb_[i];
      else if (xb_[i] > hi_[b]) v = xb_[i] - hi_[b];
      if (v > worst) {
        worst = v;
        row = i;
      }
    }
    return row;
  }

  bool dual_pivot(int row) {
    int leaving = basic_[row];
    bool below = xb_[row] < lo_[leaving];
    // Row of B^-1 A for nonbasic candidates.
    Eigen::RowVectorXd rho = binv_.row(row);
    std::vector<double> d;
    reduced_costs(false, d);
    int q = -1;
    double best_ratio = kInf;
    double best_alpha = 0.0;
    for (int j = 0; j < total_; ++j) {
      if (stat_[j] == BASIC || !movable(j)) continue;
      double alpha = 0.0;
      for (auto [i, c] : cols_[j]) alpha += rho[i] * c;
      if (std::abs(alpha) < pivot_tol_) continue;
      // x_br responds as -alpha * delta_xj; pick moves that restore it.
      bool ok;
      if (below)
        ok = (stat_[j] == AT_LO && alpha < 0.0) || (stat_[j] == AT_UP && alpha > 0.0) ||
             stat_[j] == NB_FREE;
      else
        ok = (stat_[j] == AT_LO && alpha > 0.0) || (stat_[j] == AT_UP && alpha < 0.0) ||
             stat_[j] == NB_FREE;
      if (!ok) continue;
      double ratio = std::abs(d[j]) / std::abs(alpha);
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && (q < 0 || std::abs(alpha) > std::abs(best_alpha)))) {
        best_ratio = ratio;
        best_alpha = alpha;
        q = j;
      }
    }
    if (q < 0) return false;

    Eigen::VectorXd w = ftran(q);
    stat_[leaving] = below ? AT_LO : AT_UP;
    basic_pos_[leaving] = -1;
    basic_[row] = q;
    basic_pos_[q] = row;
    stat_[q] = BASIC;
    update_binv(w, row);
    recompute_xb();
    return true;
  }
};

} // namespace stlreach::detail
