#include "stlreach/mpc.hpp"

#include "stlreach/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace stlreach {

namespace {

void require_pd(const Eigen::MatrixXd &M, const std::string &name) {
  if (M.rows() != M.cols()) throw ConfigError(name + " must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw ConfigError(name + " must be positive definite (factorization failed)");
}

} // namespace

QpResult solve_qp(const Qp &qp, const QpSettings &st) {
  const int n = static_cast<int>(qp.H.rows());
  const int m = static_cast<int>(qp.A.rows());
  QpResult out;
  if (m == 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(qp.H);
    if (llt.info() != Eigen::Success) throw NumericalError("QP Hessian not PD");
    out.z = llt.solve(-qp.q);
    out.status = QpStatus::Solved;
    out.polished = true;
    return out;
  }

  Eigen::MatrixXd K = qp.H + st.sigma * Eigen::MatrixXd::Identity(n, n) +
                      st.rho * qp.A.transpose() * qp.A;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) throw NumericalError("QP KKT factorization failed");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd ax = Eigen::VectorXd::Zero(m);

  double prim = 0.0, dual = 0.0;
  int it = 0;
  for (it = 1; it <= st.max_iterations; ++it) {
    Eigen::VectorXd rhs = st.sigma * x - qp.q + qp.A.transpose() * (st.rho * z - y);
    x = llt.solve(rhs);
    ax = qp.A * x;
    Eigen::VectorXd z_new = (ax + y / st.rho).cwiseMax(qp.l).cwiseMin(qp.u);
    Eigen::VectorXd dy = st.rho * (ax - z_new);
    y += dy;
    prim = (ax - z_new).lpNorm<Eigen::Infinity>();
    dual = (qp.H * x + qp.q + qp.A.transpose() * y).lpNorm<Eigen::Infinity>();
    z = z_new;
    if (prim < st.eps && dual < st.eps) break;

    if (it % 200 == 0 && dy.lpNorm<Eigen::Infinity>() > 1e-12) {
      // OSQP-style primal infeasibility certificate on the dual direction.
      Eigen::VectorXd d = dy / dy.lpNorm<Eigen::Infinity>();
      double atd = (qp.A.transpose() * d).lpNorm<Eigen::Infinity>();
      double support = 0.0;
      for (int i = 0; i < m; ++i) {
        if (d[i] > 0) support += std::isfinite(qp.u[i]) ? qp.u[i] * d[i] : 1e30;
        else if (d[i] < 0) support += std::isfinite(qp.l[i]) ? qp.l[i] * d[i] : 1e30;
      }
      if (atd < 1e-8 && support < -1e-8) {
        out.status = QpStatus::PrimalInfeasible;
        out.iterations = it;
        out.z = x;
        return out;
      }
    }
  }
  out.iterations = std::min(it, st.max_iterations);
  out.z = x;
  out.primal_residual = prim;
  out.dual_residual = dual;
  out.status = (prim < st.eps && dual < st.eps) ? QpStatus::Solved : QpStatus::MaxIterations;

  // Active-set polish: equality-solve on the detected active rows.
  const double act_tol = 1e-6;
  std::vector<int> active;
  std::vector<double> bval;
  for (int i = 0; i < m; ++i) {
    if (qp.l[i] == qp.u[i]) {
      active.push_back(i);
      bval.push_back(qp.l[i]);
    } else if (ax[i] <= qp.l[i] + act_tol && y[i] < -1e-9) {
      active.push_back(i);
      bval.push_back(qp.l[i]);
    } else if (ax[i] >= qp.u[i] - act_tol && y[i] > 1e-9) {
      active.push_back(i);
      bval.push_back(qp.u[i]);
    }
  }
  const int k = static_cast<int>(active.size());
  Eigen::MatrixXd KKT(n + k, n + k);
  KKT.setZero();
  KKT.topLeftCorner(n, n) = qp.H;
  Eigen::VectorXd rhs(n + k);
  rhs.head(n) = -qp.q;
  for (int i = 0; i < k; ++i) {
    KKT.block(n + i, 0, 1, n) = qp.A.row(active[i]);
    KKT.block(0, n + i, n, 1) = qp.A.row(active[i]).transpose();
    rhs[n + i] = bval[i];
  }
  Eigen::VectorXd sol = KKT.fullPivLu().solve(rhs);
  if (sol.allFinite()) {
    Eigen::VectorXd xp = sol.head(n);
    Eigen::VectorXd axp = qp.A * xp;
    bool ok = true;
    for (int i = 0; i < m; ++i)
      if (axp[i] < qp.l[i] - 1e-7 || axp[i] > qp.u[i] + 1e-7) {
        ok = false;
        break;
      }
    // Multiplier sign check: lower-active need y <= 0, upper-active y >= 0.
    for (int i = 0; ok && i < k; ++i) {
      double yi = -sol[n + i];
      if (qp.l[active[i]] == qp.u[active[i]]) continue;
      if (bval[i] == qp.l[active[i]] && yi > 1e-7) ok = false;
      if (bval[i] == qp.u[active[i]] && yi < -1e-7) ok = false;
    }
    if (ok) {
      out.z = xp;
      out.primal_residual = 0.0;
      out.dual_residual = (qp.H * xp + qp.q +
                           [&] {
                             Eigen::VectorXd yy = Eigen::VectorXd::Zero(m);
                             for (int i = 0; i < k; ++i) yy[active[i]] = -sol[n + i];
                             return (qp.A.transpose() * yy).eval();
                           }())
                              .lpNorm<Eigen::Infinity>();
      out.polished = true;
      out.status = QpStatus::Solved;
    }
  }
  return out;
}

void MpcConfig::validate(int state_dim, int input_dim) const {
  if (horizon < 1) throw ConfigError("MPC horizon must be >= 1");
  if (Q.rows() != state_dim || P.rows() != state_dim || R.rows() != input_dim)
    throw ConfigError("MPC weight dimensions do not match the system");
  require_pd(Q, "Q");
  require_pd(P, "P");
  require_pd(R, "R");
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (safety_margin < 0.0) throw ConfigError("safety margin must be >= 0");
}

Trajectory resample_plan(const LinearSystem &sys, const Trajectory &plan, int substeps) {
  if (plan.states.empty()) throw ConfigError("empty plan trajectory");
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  const double dt_fine = plan.dt / substeps;
  DiscreteSystem fine = discretize(sys, dt_fine);
  Trajectory out;
  out.dt = dt_fine;
  out.t0 = plan.t0;
  Eigen::VectorXd x = plan.states.front();
  out.states.push_back(x);
  for (std::size_t k = 0; k < plan.inputs.size(); ++k) {
    for (int s = 0; s < substeps; ++s) {
      x = step(fine, x, plan.inputs[k]);
      out.states.push_back(x);
      out.inputs.push_back(plan.inputs[k]);
    }
  }
  return out;
}

TrackingController::TrackingController(const LinearSystem &sys, Trajectory reference,
                                       MpcConfig cfg)
    : sys_(sys), ref_(std::move(reference)), cfg_(std::move(cfg)) {
  sys_.validate();
  cfg_.validate(sys_.state_dim(), sys_.input_dim());
  if (ref_.states.empty()) throw ConfigError("controller needs a reference");
  dsys_ = discretize(sys_, ref_.dt);
  u_prev_ = Eigen::VectorXd::Zero(sys_.input_dim());
  ad_pow_.resize(cfg_.horizon + 1);
  ad_pow_[0] = Eigen::MatrixXd::Identity(sys_.state_dim(), sys_.state_dim());
  for (int l = 1; l <= cfg_.horizon; ++l) ad_pow_[l] = dsys_.Ad * ad_pow_[l - 1];
  gmat_.resize(cfg_.horizon + 1);
  for (int l = 1; l <= cfg_.horizon; ++l) {
    gmat_[l].resize(l);
    for (int j = 0; j < l; ++j) gmat_[l][j] = ad_pow_[l - 1 - j] * dsys_.Bd;
  }
  predicted_.assign(cfg_.horizon + 1, Eigen::Vector2d::Zero());
}

Eigen::VectorXd TrackingController::reference_state(long fine_index) const {
  if (fine_index < 0) fine_index = 0;
  if (fine_index >= static_cast<long>(ref_.states.size()))
    fine_index = static_cast<long>(ref_.states.size()) - 1;
  return ref_.states[static_cast<std::size_t>(fine_index)];
}

Eigen::VectorXd TrackingController::braking_input(const Eigen::VectorXd &xk) const {
  // Drive velocity toward zero within the input bounds (double-integrator
  // layout: velocity dims follow the position dims).
  const int m = sys_.input_dim();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  const int n = sys_.state_dim();
  if (n != 2 * m) return u; // braking is defined for the integrator layout
  for (int j = 0; j < m; ++j) {
    int vd = m + j; // velocity component driven by input j
    double want = -xk[vd] / dsys_.dt;
    u[j] = std::clamp(want, sys_.input_lo[j], sys_.input_hi[j]);
  }
  return u;
}

StepInfo TrackingController::step(const Eigen::VectorXd &xk, double t,
                                  const std::vector<ObstacleState> &obstacles) {
  const int n = sys_.state_dim();
  const int m = sys_.input_dim();
  const int N = cfg_.horizon;
  const int nz = N * m;

  StepInfo info;
  long base_index = std::lround((t - ref_.t0) / ref_.dt);

  // Reference window r_1..r_N (padded with the final point).
  std::vector<Eigen::VectorXd> r(N + 1);
  for (int l = 0; l <= N; ++l) r[l] = reference_state(base_index + l);
  info.tracking_error = (xk.head(2) - r[0].head(2)).norm();

  // Free predictions Phi_l = Ad^l x_k.
  std::vector<Eigen::VectorXd> phi(N + 1);
  for (int l = 0; l <= N; ++l) phi[l] = ad_pow_[l] * xk;

  // Obstacle handling: emergency when strictly inside a raw box.
  std::vector<const ObstacleState *> active_obs;
  for (const auto &ob : obstacles) {
    if (position_in_box(xk, ob.box)) {
      info.inside_obstacle = true;
      continue; // no separating face: drop this obstacle's rows
    }
    active_obs.push_back(&ob);
  }

  // Condensed cost.
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(nz);
  for (int l = 1; l <= N; ++l) {
    const Eigen::MatrixXd &W = (l == N) ? cfg_.P : cfg_.Q;
    Eigen::VectorXd d = phi[l] - r[l];
    for (int j = 0; j < l; ++j) {
      q.segment(j * m, m) += 2.0 * gmat_[l][j].transpose() * W * d;
      for (int j2 = 0; j2 < l; ++j2)
        H.block(j * m, j2 * m, m, m) +=
            2.0 * gmat_[l][j].transpose() * W * gmat_[l][j2];
    }
  }
  // Input-difference cost anchored at the previously applied input.
  for (int l = 0; l < N; ++l) {
    H.block(l * m, l * m, m, m) += 2.0 * cfg_.R;
    if (l == 0) {
      q.segment(0, m) += -2.0 * cfg_.R * u_prev_;
    } else {
      H.block(l * m, (l - 1) * m, m, m) += -2.0 * cfg_.R;
      H.block((l - 1) * m, l * m, m, m) += -2.0 * cfg_.R;
      H.block((l - 1) * m, (l - 1) * m, m, m) += 2.0 * cfg_.R;
    }
  }

  // Rows: input bounds, state boxes, terminal box, obstacle half-spaces.
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> lo, up;
  auto add_row = [&](const Eigen::RowVectorXd &a, double l_, double u_) {
    rows.push_back(a);
    lo.push_back(l_);
    up.push_back(u_);
  };
  for (int l = 0; l < N; ++l)
    for (int j = 0; j < m; ++j) {
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(nz);
      a[l * m + j] = 1.0;
      add_row(a, sys_.input_lo[j], sys_.input_hi[j]);
    }
  // Row of G mapping stacked inputs to state component d at step l.
  auto g_row = [&](int l, int d) {
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(nz);
    for (int j = 0; j < l; ++j) a.segment(j * m, m) = gmat_[l][j].row(d);
    return a;
  };
  for (int l = 1; l <= N; ++l)
    for (int d = 0; d < n; ++d)
      add_row(g_row(l, d), sys_.state_lo[d] - phi[l][d], sys_.state_hi[d] - phi[l][d]);
  // Terminal box around the reference terminal point (positions only).
  double dref = 0.0;
  for (int l = 1; l <= N; ++l)
    dref = std::max(dref, (r[l].head(2) - r[l - 1].head(2)).lpNorm<Eigen::Infinity>());
  double halfw = cfg_.terminal_scale * std::max(dref, 1e-3);
  for (int d = 0; d < 2; ++d)
    add_row(g_row(N, d), r[N][d] - halfw - phi[N][d], r[N][d] + halfw - phi[N][d]);

  // Separating-face rows per obstacle and step, linearized at the previous
  // prediction (reference window on the first call).
  for (const ObstacleState *ob : active_obs) {
    const double mg = ob->margin;
    const double bl0 = ob->box.lo[0] - mg, bh0 = ob->box.hi[0] + mg;
    const double bl1 = ob->box.lo[1] - mg, bh1 = ob->box.hi[1] + mg;
    double cur_s = std::max(std::max(bl0 - xk[0], xk[0] - bh0),
                            std::max(bl1 - xk[1], xk[1] - bh1));
    double relax = std::min(0.0, cur_s);
    for (int l = 1; l <= N; ++l) {
      Eigen::Vector2d ph = have_prediction_ ? predicted_[l] : Eigen::Vector2d(r[l].head(2));
      // Face signed values, positive when outside that face.
      double s[4] = {bl0 - ph[0], ph[0] - bh0, bl1 - ph[1], ph[1] - bh1};
      int f = 0;
      for (int i = 1; i < 4; ++i)
        if (s[i] > s[f]) f = i;
      Eigen::RowVectorXd a;
      double bound;
      switch (f) {
      case 0: a = -g_row(l, 0); bound = relax - bl0 + phi[l][0]; break;  // -p_x >= relax - bl0
      case 1: a = g_row(l, 0); bound = relax + bh0 - phi[l][0]; break;   //  p_x >= relax + bh0
      case 2: a = -g_row(l, 1); bound = relax - bl1 + phi[l][1]; break;
      default: a = g_row(l, 1); bound = relax + bh1 - phi[l][1]; break;
      }
      add_row(a, bound, std::numeric_limits<double>::infinity());
    }
  }

  Qp qp;
  qp.H = H;
  qp.q = q;
  qp.A.resize(rows.size(), nz);
  qp.l.resize(rows.size());
  qp.u.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    qp.A.row(i) = rows[i];
    qp.l[i] = lo[i];
    qp.u[i] = up[i];
  }

  QpResult res = solve_qp(qp, cfg_.qp);
  info.qp_status = res.status;
  if (res.status == QpStatus::Solved || res.status == QpStatus::MaxIterations) {
    // Count near-active inequality rows for diagnostics.
    Eigen::VectorXd az = qp.A * res.z;
    for (int i = 0; i < az.size(); ++i)
      if (az[i] <= qp.l[i] + 1e-6 || az[i] >= qp.u[i] - 1e-6) ++info.active_constraints;
  }
  if (res.status == QpStatus::PrimalInfeasible ||
      (res.status == QpStatus::MaxIterations && res.primal_residual > 1e-4)) {
    info.u = braking_input(xk);
    info.emergency_brake = true;
    u_prev_ = info.u;
    // Predictions roll forward under braking for the next face selection.
    Eigen::VectorXd x = xk;
    for (int l = 0; l <= N; ++l) {
      predicted_[l] = x.head(2);
      if (l < N) x = stlreach::step(dsys_, x, braking_input(x));
    }
    have_prediction_ = true;
    return info;
  }

  info.u = res.z.head(m);
  info.qp_objective = 0.5 * res.z.dot(qp.H * res.z) + qp.q.dot(res.z);
  u_prev_ = info.u;
  // Store the predicted positions for the next step's face selection.
  Eigen::VectorXd x = xk;
  predicted_[0] = x.head(2);
  for (int l = 1; l <= N; ++l) {
    x = ad_pow_[1] * x + dsys_.Bd * res.z.segment((l - 1) * m, m);
    predicted_[l] = x.head(2);
  }
  have_prediction_ = true;
  return info;
}

std::map<std::string, Box> World::at(double t) const {
  std::map<std::string, Box> out = obstacles;
  for (const auto &mv : script) {
    if (mv.at_t <= t + 1e-9) {
      auto it = out.find(mv.name);
      if (it == out.end()) throw ConfigError("world script moves unknown obstacle " + mv.name);
      it->second.lo[0] += mv.dx;
      it->second.hi[0] += mv.dx;
      it->second.lo[1] += mv.dy;
      it->second.hi[1] += mv.dy;
    }
  }
  return out;
}

bool position_in_box(const Eigen::VectorXd &state, const Box &box2d) {
  return state[0] > box2d.lo[0] && state[0] < box2d.hi[0] && state[1] > box2d.lo[1] &&
         state[1] < box2d.hi[1];
}

ClosedLoopResult run_closed_loop(const LinearSystem &sys, TrackingController &ctrl,
                                 const World &world, int steps,
                                 const Eigen::VectorXd &x0) {
  ClosedLoopResult out;
  const double dt = ctrl.fine_system().dt;
  out.trace.dt = dt;
  out.trace.t0 = 0.0;
  Eigen::VectorXd x = x0;
  out.trace.states.push_back(x);

  for (int k = 0; k < steps; ++k) {
    const double t = dt * k;
    auto boxes = world.at(t);
    std::vector<ObstacleState> obs;
    for (const auto &[name, box] : boxes)
      obs.push_back({name, box, ctrl.config().safety_margin});

    StepInfo si = ctrl.step(x, t, obs);

    ClosedLoopEvent ev;
    ev.t = t;
    ev.x = x;
    ev.u = si.u;
    ev.qp_status = si.qp_status;
    ev.emergency_brake = si.emergency_brake;
    ev.tracking_error = si.tracking_error;
    ev.active_constraints = si.active_constraints;
    for (const auto &[name, box] : boxes)
      if (position_in_box(x, box)) ev.violation = true;
    if (ev.violation) ++out.violations;
    if (si.emergency_brake || si.inside_obstacle) ++out.flagged_steps;
    out.events.push_back(std::move(ev));

    x = step(ctrl.fine_system(), x, si.u);
    out.trace.states.push_back(x);
    out.trace.inputs.push_back(si.u);
  }
  // Final-sample collision check.
  auto boxes = world.at(dt * steps);
  for (const auto &[name, box] : boxes)
    if (position_in_box(x, box)) ++out.violations;
  return out;
}

} // namespace stlreach
