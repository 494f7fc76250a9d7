#pragma once

#include "stlreach/formula.hpp"

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

namespace stlreach {

// Placeholder value for "empty set" targets (and its negation for trivially
// satisfied constraints) outside their active time window.
inline constexpr double kLargeValue = 1e6;

// Rectangular state grid with per-dimension bounds and point counts.
// Node ordering is row-major with dimension 0 slowest.
struct Grid {
  Eigen::VectorXd lo, hi;
  std::vector<int> counts;

  Grid() = default;
  Grid(Eigen::VectorXd lo_, Eigen::VectorXd hi_, std::vector<int> counts_);

  int dim() const { return static_cast<int>(counts.size()); }
  std::size_t num_nodes() const;
  double spacing(int d) const {
    return (hi[d] - lo[d]) / static_cast<double>(counts[d] - 1);
  }
  double coord(int d, int i) const { return lo[d] + spacing(d) * i; }
  double max_spacing() const;

  std::size_t stride(int d) const; // nodes per increment of index d
  void unravel(std::size_t node, int *idx) const;
  std::size_t ravel(const int *idx) const;
  Eigen::VectorXd node_point(std::size_t node) const;

  bool operator==(const Grid &o) const;
};

// Dense value-function samples h(t_k, x) over a state-time grid; times are
// strictly increasing.
struct LevelSetGrid {
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values; // values[k][node]

  void validate() const;
  std::size_t num_times() const { return times.size(); }

  // Multilinear interpolation in space, linear in time. Out-of-bounds
  // queries are an error.
  double value_at(double t, const Eigen::VectorXd &x) const;

  // Spatial interpolation within one stored slice.
  double value_in_slice(std::size_t k, const Eigen::VectorXd &x) const;

  void negate_in_place();
};

// Versioned binary format: magic, dims, counts, bounds, times, then
// little-endian float32 values in row-major node order per time slice.
void save_level_set(const LevelSetGrid &lsg, const std::string &path);
LevelSetGrid load_level_set(const std::string &path);

// Axis-aligned box; use +/-infinity for unconstrained dimensions.
struct Box {
  Eigen::VectorXd lo, hi;
  bool contains(const Eigen::VectorXd &x) const;
};

// Exact Euclidean signed distance to the box boundary, negative strictly
// inside when inside_negative (default); negated otherwise.
double signed_distance_box(const Box &box, const Eigen::VectorXd &x,
                           bool inside_negative = true);
std::vector<double> signed_distance_box(const Grid &grid, const Box &box,
                                        bool inside_negative = true);

// Time-varying implicit set: sample(t) fills one value per grid node.
class TimeVaryingSet {
public:
  virtual ~TimeVaryingSet() = default;
  virtual void sample(double t, const Grid &grid, std::vector<double> &out) const = 0;
};
using TimeVaryingSetPtr = std::shared_ptr<const TimeVaryingSet>;

TimeVaryingSetPtr make_constant_set(double value);
TimeVaryingSetPtr make_static_set(std::vector<double> values);
// "Empty outside the window": returns outside_value for t outside [w0, w1].
TimeVaryingSetPtr make_windowed_set(TimeVaryingSetPtr inner, double w0, double w1,
                                    double outside_value);
TimeVaryingSetPtr make_max_set(std::vector<TimeVaryingSetPtr> parts);
TimeVaryingSetPtr make_min_set(std::vector<TimeVaryingSetPtr> parts);
TimeVaryingSetPtr make_negated_set(TimeVaryingSetPtr inner);
// Backed by a solved tube on the same grid; linear interpolation in time,
// clamped at the tube's first/last slice.
TimeVaryingSetPtr make_grid_backed_set(std::shared_ptr<const LevelSetGrid> lsg);

// Static level set of a temporal-free formula: h(x) = -rho(x, f), clamped to
// +/- kLargeValue; negative exactly on the satisfying states.
std::vector<double> state_formula_levelset(const Grid &grid, const Formula &f);
double state_formula_value(const Formula &f, const Eigen::VectorXd &x);

} // namespace stlreach
