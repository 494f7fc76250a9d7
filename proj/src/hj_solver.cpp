#include "stlreach/hj_solver.hpp"

#include "stlreach/errors.hpp"
#include "stlreach/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace stlreach {

std::vector<double> make_export_times(double t0, double T, double out_dt) {
  if (!(T > t0)) throw ConfigError("export span requires t0 < T");
  if (out_dt <= 0.0) throw ConfigError("export dt must be positive");
  std::vector<double> times;
  long n = static_cast<long>(std::floor((T - t0) / out_dt + 1e-9));
  for (long k = 0; k <= n; ++k) times.push_back(t0 + out_dt * static_cast<double>(k));
  if (T - times.back() > 1e-9 * std::max(1.0, std::abs(T))) times.push_back(T);
  else times.back() = T;
  return times;
}

namespace {

// Per-dimension bound on |xdot_d| over the grid box, admissible inputs, and
// the disturbance bound; these are the Lax-Friedrichs dissipation
// coefficients.
std::vector<double> speed_bounds(const LinearSystem &sys, const Grid &grid) {
  const int n = sys.state_dim(), m = sys.input_dim();
  std::vector<double> alpha(n, 0.0);
  for (int d = 0; d < n; ++d) {
    double a = 0.0;
    for (int j = 0; j < n; ++j)
      a += std::max(std::abs(sys.A(d, j) * grid.lo[j]), std::abs(sys.A(d, j) * grid.hi[j]));
    for (int j = 0; j < m; ++j)
      a += std::max(std::abs(sys.B(d, j) * sys.input_lo[j]),
                    std::abs(sys.B(d, j) * sys.input_hi[j]));
    if (sys.disturbance_bound.size() == n) a += std::abs(sys.disturbance_bound[d]);
    alpha[d] = a;
  }
  return alpha;
}

struct Stepper {
  const LinearSystem &sys;
  const Grid &grid;
  bool minimal; // true: control maximizes the Hamiltonian (avoids the target)
  std::vector<double> alpha;
  std::vector<std::vector<double>> drift; // drift[d][node] = (A x)_d
  std::vector<double> inv_dx;
  std::vector<std::size_t> strides;

  Stepper(const LinearSystem &s, const Grid &g, bool min_brt)
      : sys(s), grid(g), minimal(min_brt), alpha(speed_bounds(s, g)) {
    const int n = grid.dim();
    inv_dx.resize(n);
    strides.resize(n);
    for (int d = 0; d < n; ++d) {
      inv_dx[d] = 1.0 / grid.spacing(d);
      strides[d] = grid.stride(d);
    }
    drift.assign(n, std::vector<double>(grid.num_nodes(), 0.0));
    const std::size_t total = grid.num_nodes();
    std::vector<int> idx(n);
    for (std::size_t node = 0; node < total; ++node) {
      grid.unravel(node, idx.data());
      for (int d = 0; d < n; ++d) {
        double v = 0.0;
        for (int j = 0; j < n; ++j)
          if (sys.A(d, j) != 0.0) v += sys.A(d, j) * grid.coord(j, idx[j]);
        drift[d][node] = v;
      }
    }
  }

  double cfl_dt(double cfl_factor) const {
    double s = 0.0;
    for (int d = 0; d < grid.dim(); ++d) s += alpha[d] * inv_dx[d];
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return cfl_factor / s;
  }

  // One explicit backward step of size h: out = V + h * (H(pbar) + diss).
  void propagate(const std::vector<double> &V, double h, std::vector<double> &out) const {
    const int n = grid.dim();
    const int last = n - 1;
    const int m = sys.input_dim();
    const std::size_t inner = static_cast<std::size_t>(grid.counts[last]);
    const std::size_t rows = grid.num_nodes() / inner;

    parallel_for_chunks(rows, [&](std::size_t row_lo, std::size_t row_hi) {
      std::vector<int> idx(n);
      std::vector<double> pbar(n), diff(n);
      for (std::size_t row = row_lo; row < row_hi; ++row) {
        std::size_t base = row * inner;
        grid.unravel(base, idx.data());
        for (std::size_t i = 0; i < inner; ++i) {
          const std::size_t node = base + i;
          idx[last] = static_cast<int>(i);
          const double vc = V[node];
          for (int d = 0; d < n; ++d) {
            const std::size_t st = strides[d];
            const bool has_lo = idx[d] > 0;
            const bool has_hi = idx[d] < grid.counts[d] - 1;
            double dm = has_lo ? (vc - V[node - st]) * inv_dx[d] : 0.0;
            double dp = has_hi ? (V[node + st] - vc) * inv_dx[d] : 0.0;
            if (!has_lo) dm = dp;
            if (!has_hi) dp = dm;
            pbar[d] = 0.5 * (dm + dp);
            diff[d] = dp - dm;
          }
          double ham = 0.0;
          for (int d = 0; d < n; ++d) ham += pbar[d] * drift[d][node];
          for (int j = 0; j < m; ++j) {
            double beta = 0.0;
            for (int d = 0; d < n; ++d)
              if (sys.B(d, j) != 0.0) beta += pbar[d] * sys.B(d, j);
            const double a = beta * sys.input_lo[j];
            const double b = beta * sys.input_hi[j];
            ham += minimal ? std::max(a, b) : std::min(a, b);
          }
          if (sys.disturbance_bound.size() == n) {
            for (int d = 0; d < n; ++d) {
              const double w = std::abs(pbar[d]) * sys.disturbance_bound[d];
              ham += minimal ? -w : w;
            }
          }
          double diss = 0.0;
          for (int d = 0; d < n; ++d) diss += alpha[d] * diff[d];
          out[node] = vc + h * (ham + 0.5 * diss);
        }
      }
    });
  }
};

LevelSetGrid solve_brt(const LinearSystem &sys, const TimeVaryingSetPtr &target,
                       const TimeVaryingSetPtr &constraint, double t0, double T,
                       const Grid &grid, const std::vector<double> &export_times,
                       const BrtOptions &opt, bool minimal) {
  sys.validate();
  if (!target) throw ConfigError("BRT solve requires a target set");
  if (!(t0 < T)) throw ConfigError("BRT solve requires t0 < T");
  if (grid.dim() != sys.state_dim())
    throw ConfigError("grid dimension does not match the system state dimension");
  if (export_times.size() < 2 || std::abs(export_times.front() - t0) > 1e-9 ||
      std::abs(export_times.back() - T) > 1e-9)
    throw ConfigError("export times must span [t0, T]");

  Stepper st(sys, grid, minimal);
  const double dt_max = st.cfl_dt(opt.cfl_factor);
  double dt = opt.dt_solver;
  if (dt <= 0.0) {
    dt = std::min(dt_max, T - t0);
  } else if (dt > dt_max * (1.0 + 1e-9)) {
    throw NumericalError("dt_solver " + std::to_string(dt) +
                         " violates the CFL bound; required dt <= " +
                         std::to_string(dt_max));
  }

  const std::size_t nn = grid.num_nodes();
  std::vector<double> V(nn), scratch(nn), tgt(nn), cons;

  auto clamp_large = [](std::vector<double> &v) {
    for (double &x : v) x = std::clamp(x, -kLargeValue, kLargeValue);
  };

  // Terminal slice: reaching at s = T requires membership in both sets.
  target->sample(T, grid, V);
  clamp_large(V);
  if (constraint) {
    constraint->sample(T, grid, cons);
    clamp_large(cons);
    for (std::size_t i = 0; i < nn; ++i) V[i] = std::max(V[i], cons[i]);
  }

  LevelSetGrid out;
  out.grid = grid;
  out.times = export_times;
  out.values.assign(export_times.size(), {});
  out.values.back() = V;

  for (std::size_t seg = export_times.size() - 1; seg-- > 0;) {
    const double t_hi = export_times[seg + 1];
    const double t_lo = export_times[seg];
    const long steps = std::max<long>(1, static_cast<long>(std::ceil((t_hi - t_lo) / dt - 1e-9)));
    const double h = (t_hi - t_lo) / static_cast<double>(steps);
    double t = t_hi;
    for (long k = 0; k < steps; ++k) {
      const double t_next = (k + 1 == steps) ? t_lo : t - h;
      st.propagate(V, h, scratch);
      target->sample(t_next, grid, tgt);
      clamp_large(tgt);
      for (std::size_t i = 0; i < nn; ++i)
        scratch[i] = std::min(std::clamp(scratch[i], -kLargeValue, kLargeValue), tgt[i]);
      if (constraint) {
        constraint->sample(t_next, grid, cons);
        clamp_large(cons);
        for (std::size_t i = 0; i < nn; ++i) scratch[i] = std::max(scratch[i], cons[i]);
      }
      V.swap(scratch);
      t = t_next;
    }
    out.values[seg] = V;
  }
  out.validate();
  return out;
}

} // namespace

double cfl_time_step(const LinearSystem &sys, const Grid &grid, bool minimal,
                     double cfl_factor) {
  return Stepper(sys, grid, minimal).cfl_dt(cfl_factor);
}

LevelSetGrid solve_maximal_brt(const LinearSystem &sys, const TimeVaryingSetPtr &target,
                               const TimeVaryingSetPtr &constraint, double t0, double T,
                               const Grid &grid, const std::vector<double> &export_times,
                               const BrtOptions &opt) {
  return solve_brt(sys, target, constraint, t0, T, grid, export_times, opt, false);
}

LevelSetGrid solve_minimal_brt(const LinearSystem &sys, const TimeVaryingSetPtr &target,
                               double t0, double T, const Grid &grid,
                               const std::vector<double> &export_times,
                               const BrtOptions &opt) {
  return solve_brt(sys, target, nullptr, t0, T, grid, export_times, opt, true);
}

} // namespace stlreach
