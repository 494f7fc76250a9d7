#include "stlreach/level_set.hpp"

#include "stlreach/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

namespace stlreach {

Grid::Grid(Eigen::VectorXd lo_, Eigen::VectorXd hi_, std::vector<int> counts_)
    : lo(std::move(lo_)), hi(std::move(hi_)), counts(std::move(counts_)) {
  if (lo.size() != hi.size() || static_cast<std::size_t>(lo.size()) != counts.size())
    throw ConfigError("grid dimension mismatch");
  for (int d = 0; d < dim(); ++d) {
    if (counts[d] < 3) throw ConfigError("grid needs >= 3 points per dimension");
    if (!(lo[d] < hi[d])) throw ConfigError("grid requires lo < hi per dimension");
  }
}

std::size_t Grid::num_nodes() const {
  std::size_t n = 1;
  for (int c : counts) n *= static_cast<std::size_t>(c);
  return n;
}

double Grid::max_spacing() const {
  double s = 0.0;
  for (int d = 0; d < dim(); ++d) s = std::max(s, spacing(d));
  return s;
}

std::size_t Grid::stride(int d) const {
  std::size_t s = 1;
  for (int k = d + 1; k < dim(); ++k) s *= static_cast<std::size_t>(counts[k]);
  return s;
}

void Grid::unravel(std::size_t node, int *idx) const {
  for (int d = dim() - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(node % static_cast<std::size_t>(counts[d]));
    node /= static_cast<std::size_t>(counts[d]);
  }
}

std::size_t Grid::ravel(const int *idx) const {
  std::size_t node = 0;
  for (int d = 0; d < dim(); ++d)
    node = node * static_cast<std::size_t>(counts[d]) + static_cast<std::size_t>(idx[d]);
  return node;
}

Eigen::VectorXd Grid::node_point(std::size_t node) const {
  int idx[8];
  unravel(node, idx);
  Eigen::VectorXd x(dim());
  for (int d = 0; d < dim(); ++d) x[d] = coord(d, idx[d]);
  return x;
}

bool Grid::operator==(const Grid &o) const {
  return counts == o.counts && lo == o.lo && hi == o.hi;
}

void LevelSetGrid::validate() const {
  if (times.empty()) throw ConfigError("level set has no time slices");
  if (values.size() != times.size())
    throw ConfigError("level set slice count does not match time count");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigError("level set times must be strictly increasing");
  const std::size_t n = grid.num_nodes();
  for (const auto &slice : values) {
    if (slice.size() != n) throw ConfigError("level set slice size mismatch");
    for (double v : slice)
      if (!std::isfinite(v)) throw ConfigError("level set contains non-finite values");
  }
}

double LevelSetGrid::value_in_slice(std::size_t k, const Eigen::VectorXd &x) const {
  const int d = grid.dim();
  if (x.size() != d) throw ConfigError("query dimension mismatch");
  const double tol = 1e-9;
  int base[8];
  double frac[8];
  for (int i = 0; i < d; ++i) {
    double s = grid.spacing(i);
    double rel = (x[i] - grid.lo[i]) / s;
    if (rel < -tol || rel > static_cast<double>(grid.counts[i] - 1) + tol)
      throw ConfigError("query point outside grid volume (dim " + std::to_string(i) + ")");
    rel = std::clamp(rel, 0.0, static_cast<double>(grid.counts[i] - 1));
    int b = std::min(static_cast<int>(rel), grid.counts[i] - 2);
    base[i] = b;
    frac[i] = rel - b;
  }
  const auto &slice = values[k];
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    int idx[8];
    for (int i = 0; i < d; ++i) {
      int bit = (c >> i) & 1;
      idx[i] = base[i] + bit;
      w *= bit ? frac[i] : (1.0 - frac[i]);
    }
    if (w != 0.0) acc += w * slice[grid.ravel(idx)];
  }
  return acc;
}

double LevelSetGrid::value_at(double t, const Eigen::VectorXd &x) const {
  const double tol = 1e-9;
  if (t < times.front() - tol || t > times.back() + tol)
    throw ConfigError("query time outside stored span");
  t = std::clamp(t, times.front(), times.back());
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k1 = std::min<std::size_t>(times.size() - 1, it - times.begin());
  std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
  if (k0 == k1) return value_in_slice(k0, x);
  double w = (t - times[k0]) / (times[k1] - times[k0]);
  if (w <= 0.0) return value_in_slice(k0, x);
  if (w >= 1.0) return value_in_slice(k1, x);
  return (1.0 - w) * value_in_slice(k0, x) + w * value_in_slice(k1, x);
}

void LevelSetGrid::negate_in_place() {
  for (auto &slice : values)
    for (double &v : slice) v = -v;
}

namespace {
template <typename T> void write_raw(std::ofstream &os, const T &v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <typename T> T read_raw(std::ifstream &is) {
  T v;
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated level set file");
  return v;
}
} // namespace

void save_level_set(const LevelSetGrid &lsg, const std::string &path) {
  lsg.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os.write("LSG1", 4);
  write_raw<std::uint32_t>(os, 1u); // version
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(lsg.grid.dim()));
  for (int d = 0; d < lsg.grid.dim(); ++d) {
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(lsg.grid.counts[d]));
    write_raw<double>(os, lsg.grid.lo[d]);
    write_raw<double>(os, lsg.grid.hi[d]);
  }
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(lsg.times.size()));
  for (double t : lsg.times) write_raw<double>(os, t);
  for (const auto &slice : lsg.values)
    for (double v : slice) write_raw<float>(os, static_cast<float>(v));
  if (!os) throw ConfigError("write failed: " + path);
}

LevelSetGrid load_level_set(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open level set file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::strncmp(magic, "LSG1", 4) != 0)
    throw ConfigError("not a level set file: " + path);
  auto version = read_raw<std::uint32_t>(is);
  if (version != 1u) throw ConfigError("unsupported level set file version");
  auto ndims = read_raw<std::uint32_t>(is);
  if (ndims == 0 || ndims > 8) throw ConfigError("bad dimension count in level set file");
  Eigen::VectorXd lo(ndims), hi(ndims);
  std::vector<int> counts(ndims);
  for (std::uint32_t d = 0; d < ndims; ++d) {
    counts[d] = static_cast<int>(read_raw<std::uint32_t>(is));
    lo[d] = read_raw<double>(is);
    hi[d] = read_raw<double>(is);
  }
  LevelSetGrid lsg;
  lsg.grid = Grid(lo, hi, counts);
  auto ntimes = read_raw<std::uint32_t>(is);
  lsg.times.resize(ntimes);
  for (auto &t : lsg.times) t = read_raw<double>(is);
  const std::size_t n = lsg.grid.num_nodes();
  lsg.values.assign(ntimes, std::vector<double>(n));
  for (auto &slice : lsg.values)
    for (double &v : slice) v = static_cast<double>(read_raw<float>(is));
  lsg.validate();
  return lsg;
}

bool Box::contains(const Eigen::VectorXd &x) const {
  for (int d = 0; d < x.size(); ++d)
    if (x[d] < lo[d] || x[d] > hi[d]) return false;
  return true;
}

double signed_distance_box(const Box &box, const Eigen::VectorXd &x,
                           bool inside_negative) {
  const int d = static_cast<int>(x.size());
  if (box.lo.size() != d || box.hi.size() != d)
    throw ConfigError("box dimension mismatch");
  double outside_sq = 0.0;
  double inside = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    if (!(box.lo[i] < box.hi[i])) throw ConfigError("degenerate box (zero volume)");
    double q = std::max(box.lo[i] - x[i], x[i] - box.hi[i]);
    if (q > 0.0) outside_sq += q * q;
    inside = std::max(inside, q);
  }
  double sdf = outside_sq > 0.0 ? std::sqrt(outside_sq) : std::min(inside, 0.0);
  return inside_negative ? sdf : -sdf;
}

std::vector<double> signed_distance_box(const Grid &grid, const Box &box,
                                        bool inside_negative) {
  // Reject boxes fully outside the grid volume on any finite dimension.
  for (int d = 0; d < grid.dim(); ++d)
    if (box.hi[d] < grid.lo[d] || box.lo[d] > grid.hi[d])
      throw ConfigError("box does not intersect grid volume");
  std::vector<double> out(grid.num_nodes());
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i)
    out[i] = signed_distance_box(box, grid.node_point(i), inside_negative);
  return out;
}

// ---------------------------------------------------------------------------
// Time-varying set combinators

namespace {

class ConstantSet final : public TimeVaryingSet {
public:
  explicit ConstantSet(double v) : v_(v) {}
  void sample(double, const Grid &grid, std::vector<double> &out) const override {
    out.assign(grid.num_nodes(), v_);
  }

private:
  double v_;
};

class StaticSet final : public TimeVaryingSet {
public:
  explicit StaticSet(std::vector<double> v) : v_(std::move(v)) {}
  void sample(double, const Grid &grid, std::vector<double> &out) const override {
    if (v_.size() != grid.num_nodes())
      throw ConfigError("static set size does not match grid");
    out = v_;
  }

private:
  std::vector<double> v_;
};

class WindowedSet final : public TimeVaryingSet {
public:
  WindowedSet(TimeVaryingSetPtr inner, double w0, double w1, double outside)
      : inner_(std::move(inner)), w0_(w0), w1_(w1), outside_(outside) {}
  void sample(double t, const Grid &grid, std::vector<double> &out) const override {
    const double eps = 1e-9;
    if (t < w0_ - eps || t > w1_ + eps)
      out.assign(grid.num_nodes(), outside_);
    else
      inner_->sample(t, grid, out);
  }

private:
  TimeVaryingSetPtr inner_;
  double w0_, w1_, outside_;
};

class CombineSet final : public TimeVaryingSet {
public:
  CombineSet(std::vector<TimeVaryingSetPtr> parts, bool take_max)
      : parts_(std::move(parts)), max_(take_max) {
    if (parts_.empty()) throw ConfigError("empty set combination");
  }
  void sample(double t, const Grid &grid, std::vector<double> &out) const override {
    parts_[0]->sample(t, grid, out);
    std::vector<double> tmp;
    for (std::size_t i = 1; i < parts_.size(); ++i) {
      parts_[i]->sample(t, grid, tmp);
      if (max_)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j], tmp[j]);
      else
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::min(out[j], tmp[j]);
    }
  }

private:
  std::vector<TimeVaryingSetPtr> parts_;
  bool max_;
};

class NegatedSet final : public TimeVaryingSet {
public:
  explicit NegatedSet(TimeVaryingSetPtr inner) : inner_(std::move(inner)) {}
  void sample(double t, const Grid &grid, std::vector<double> &out) const override {
    inner_->sample(t, grid, out);
    for (double &v : out) v = -v;
  }

private:
  TimeVaryingSetPtr inner_;
};

class GridBackedSet final : public TimeVaryingSet {
public:
  explicit GridBackedSet(std::shared_ptr<const LevelSetGrid> lsg) : lsg_(std::move(lsg)) {
    if (!lsg_) throw ConfigError("null level set");
  }
  void sample(double t, const Grid &grid, std::vector<double> &out) const override {
    if (!(grid == lsg_->grid))
      throw ConfigError("grid-backed set sampled on a different grid");
    const auto &times = lsg_->times;
    t = std::clamp(t, times.front(), times.back());
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k1 = std::min<std::size_t>(times.size() - 1, it - times.begin());
    std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
    const auto &a = lsg_->values[k0];
    if (k0 == k1 || times[k1] == times[k0]) {
      out = a;
      return;
    }
    double w = (t - times[k0]) / (times[k1] - times[k0]);
    if (w <= 1e-12) {
      out = a;
      return;
    }
    const auto &b = lsg_->values[k1];
    if (w >= 1.0 - 1e-12) {
      out = b;
      return;
    }
    out.resize(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = (1.0 - w) * a[j] + w * b[j];
  }

private:
  std::shared_ptr<const LevelSetGrid> lsg_;
};

} // namespace

TimeVaryingSetPtr make_constant_set(double value) {
  return std::make_shared<ConstantSet>(value);
}
TimeVaryingSetPtr make_static_set(std::vector<double> values) {
  return std::make_shared<StaticSet>(std::move(values));
}
TimeVaryingSetPtr make_windowed_set(TimeVaryingSetPtr inner, double w0, double w1,
                                    double outside_value) {
  return std::make_shared<WindowedSet>(std::move(inner), w0, w1, outside_value);
}
TimeVaryingSetPtr make_max_set(std::vector<TimeVaryingSetPtr> parts) {
  if (parts.size() == 1) return parts[0];
  return std::make_shared<CombineSet>(std::move(parts), true);
}
TimeVaryingSetPtr make_min_set(std::vector<TimeVaryingSetPtr> parts) {
  if (parts.size() == 1) return parts[0];
  return std::make_shared<CombineSet>(std::move(parts), false);
}
TimeVaryingSetPtr make_negated_set(TimeVaryingSetPtr inner) {
  return std::make_shared<NegatedSet>(std::move(inner));
}
TimeVaryingSetPtr make_grid_backed_set(std::shared_ptr<const LevelSetGrid> lsg) {
  return std::make_shared<GridBackedSet>(std::move(lsg));
}

double state_formula_value(const Formula &f, const Eigen::VectorXd &x) {
  switch (f.kind()) {
  case NodeKind::True:
    return -kLargeValue;
  case NodeKind::Pred:
    return std::clamp(-f.predicate().margin(x), -kLargeValue, kLargeValue);
  case NodeKind::Not:
    return -state_formula_value(f.child(0), x);
  case NodeKind::And: {
    double v = -kLargeValue;
    for (const auto &c : f.children()) v = std::max(v, state_formula_value(c, x));
    return v;
  }
  case NodeKind::Or: {
    double v = kLargeValue;
    for (const auto &c : f.children()) v = std::min(v, state_formula_value(c, x));
    return v;
  }
  default:
    throw ConfigError("temporal operator inside a state-formula level set");
  }
}

std::vector<double> state_formula_levelset(const Grid &grid, const Formula &f) {
  std::vector<double> out(grid.num_nodes());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = state_formula_value(f, grid.node_point(i));
  return out;
}

} // namespace stlreach
