#pragma once

#include "stlreach/formula.hpp"
#include "stlreach/trajectory.hpp"

namespace stlreach {

// Quantitative robustness of phi over the sampled trace, evaluated at sample
// t_index. Temporal windows are mapped to the enclosed sample indices; a
// window that reaches past the sampled horizon (or encloses no sample) is an
// error rather than -inf.
double robustness(const Trajectory &traj, std::size_t t_index, const Formula &phi);

// True iff robustness(traj, 0, phi) > 0 (strict).
bool satisfies(const Trajectory &traj, const Formula &phi);

} // namespace stlreach
