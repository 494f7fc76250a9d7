#pragma once

#include <Eigen/Core>
#include <vector>

namespace stlreach {

// Uniformly sampled state/input sequence; the common currency of the
// planner, controller, and robustness checker. inputs (when present) is one
// shorter than states.
struct Trajectory {
  double dt = 1.0;
  double t0 = 0.0;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;

  int state_dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
  std::size_t size() const { return states.size(); }
  double time_at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

// Maps a temporal window [lo, hi] (seconds) to relative sample offsets
// [ceil(lo/dt), floor(hi/dt)] with a small tolerance against floating-point
// drift. first > second means the window encloses no sample.
std::pair<long, long> window_to_steps(double lo, double hi, double dt);

} // namespace stlreach
