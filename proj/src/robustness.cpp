#include "stlreach/robustness.hpp"

#include "stlreach/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlreach {

std::pair<long, long> window_to_steps(double lo, double hi, double dt) {
  if (dt <= 0.0) throw ConfigError("dt must be positive");
  const double eps = 1e-9;
  long a = static_cast<long>(std::ceil(lo / dt - eps));
  long b = static_cast<long>(std::floor(hi / dt + eps));
  return {a, b};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Eval {
  const Trajectory &traj;

  std::pair<std::size_t, std::size_t> window_indices(std::size_t k, const Formula &f) const {
    auto [a, b] = window_to_steps(f.window_lo(), f.window_hi(), traj.dt);
    long lo = static_cast<long>(k) + a;
    long hi = static_cast<long>(k) + b;
    long last = static_cast<long>(traj.size()) - 1;
    if (lo > hi)
      throw ConfigError("temporal window [" + std::to_string(f.window_lo()) + "," +
                        std::to_string(f.window_hi()) + "] encloses no sample at dt " +
                        std::to_string(traj.dt));
    if (hi > last || lo > last)
      throw ConfigError("temporal window exceeds trajectory horizon (needs sample " +
                        std::to_string(hi) + ", trace ends at " + std::to_string(last) + ")");
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }

  double rho(std::size_t k, const Formula &f) const {
    switch (f.kind()) {
    case NodeKind::True:
      return kInf;
    case NodeKind::Pred:
      return f.predicate().margin(traj.states[k]);
    case NodeKind::Not:
      return -rho(k, f.child(0));
    case NodeKind::And: {
      double v = kInf;
      for (const auto &c : f.children()) v = std::min(v, rho(k, c));
      return v;
    }
    case NodeKind::Or: {
      double v = -kInf;
      for (const auto &c : f.children()) v = std::max(v, rho(k, c));
      return v;
    }
    case NodeKind::Eventually: {
      auto [lo, hi] = window_indices(k, f);
      double v = -kInf;
      for (std::size_t j = lo; j <= hi; ++j) v = std::max(v, rho(j, f.child(0)));
      return v;
    }
    case NodeKind::Always: {
      auto [lo, hi] = window_indices(k, f);
      double v = kInf;
      for (std::size_t j = lo; j <= hi; ++j) v = std::min(v, rho(j, f.child(0)));
      return v;
    }
    case NodeKind::Until: {
      // max over t' in the window of min(rho(phi2 at t'), min over t'' in
      // [t, t'] of rho(phi1 at t'')), prefix minimum carried incrementally.
      auto [lo, hi] = window_indices(k, f);
      double prefix = kInf;
      for (std::size_t j = k; j < lo; ++j) prefix = std::min(prefix, rho(j, f.child(0)));
      double v = -kInf;
      for (std::size_t j = lo; j <= hi; ++j) {
        prefix = std::min(prefix, rho(j, f.child(0)));
        v = std::max(v, std::min(rho(j, f.child(1)), prefix));
      }
      return v;
    }
    }
    throw ConfigError("unreachable formula kind");
  }
};

} // namespace

double robustness(const Trajectory &traj, std::size_t t_index, const Formula &phi) {
  if (traj.states.empty()) throw ConfigError("trajectory has no samples");
  if (traj.dt <= 0.0) throw ConfigError("trajectory dt must be positive");
  if (t_index >= traj.size()) throw ConfigError("t_index outside trajectory");
  int fd = phi.state_dim();
  if (fd > 0 && fd != traj.state_dim())
    throw ConfigError("formula state dimension " + std::to_string(fd) +
                      " does not match trajectory dimension " +
                      std::to_string(traj.state_dim()));
  return Eval{traj}.rho(t_index, phi);
}

bool satisfies(const Trajectory &traj, const Formula &phi) {
  return robustness(traj, 0, phi) > 0.0;
}

} // namespace stlreach
