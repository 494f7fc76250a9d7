#include "stlreach/surrogate.hpp"

#include "stlreach/errors.hpp"
#include "stlreach/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace stlreach {

void TrainConfig::validate() const {
  if (epsilon < 0.0 || lambda < 0.0) throw ConfigError("epsilon and lambda must be >= 0");
  if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (batch_size < 1 || epochs < 1) throw ConfigError("batch size and epochs must be >= 1");
  for (int hdim : hidden)
    if (hdim < 1) throw ConfigError("hidden widths must be >= 1");
}

void Mlp::refresh_inference_cache() const {
  Wf.clear();
  bf.clear();
  for (const auto &w : W) Wf.push_back(w.cast<float>());
  for (const auto &v : b) bf.push_back(v.cast<float>());
  cache_valid = true;
}

Dataset build_dataset(const LevelSetGrid &lsg, double subsample, std::uint64_t seed) {
  lsg.validate();
  if (!(subsample > 0.0 && subsample <= 1.0))
    throw ConfigError("subsample must be in (0, 1]");
  const Grid &g = lsg.grid;
  const std::size_t nn = g.num_nodes();
  if (nn == 0 || lsg.times.empty()) throw ConfigError("empty grid");
  const int in_dim = 1 + g.dim();

  // Finite dynamic range, excluding the "empty set" placeholder magnitudes.
  double clip = 0.0;
  for (const auto &slice : lsg.values)
    for (double v : slice)
      if (std::abs(v) < kLargeValue / 2) clip = std::max(clip, std::abs(v));
  if (clip == 0.0) clip = 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  std::vector<double> rows;
  std::vector<double> targets;
  for (std::size_t k = 0; k < lsg.times.size(); ++k) {
    for (std::size_t node = 0; node < nn; ++node) {
      if (subsample < 1.0 && uni(rng) >= subsample) continue;
      rows.push_back(lsg.times[k]);
      Eigen::VectorXd x = g.node_point(node);
      for (int d = 0; d < g.dim(); ++d) rows.push_back(x[d]);
      targets.push_back(std::clamp(lsg.values[k][node], -clip, clip));
    }
  }
  const std::size_t n = targets.size();
  if (n == 0) throw ConfigError("subsampling produced an empty dataset");

  Dataset ds;
  ds.h_clip = clip;
  ds.X.resize(n, in_dim);
  ds.h.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < in_dim; ++c) ds.X(i, c) = rows[i * in_dim + c];
    ds.h[i] = targets[i];
  }

  ds.in_mean = ds.X.colwise().mean();
  Eigen::VectorXd var =
      ((ds.X.rowwise() - ds.in_mean.transpose()).array().square().colwise().mean());
  ds.in_std = var.array().sqrt().max(1e-12);
  ds.in_lo = ds.X.colwise().minCoeff();
  ds.in_hi = ds.X.colwise().maxCoeff();
  double hm = ds.h.mean();
  ds.h_std = std::max(std::sqrt((ds.h.array() - hm).square().mean()), 1e-12);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t n_val = std::max<std::size_t>(1, n / 10);
  if (n_val >= n) n_val = n - 1;
  ds.val_idx.assign(idx.begin(), idx.begin() + n_val);
  ds.train_idx.assign(idx.begin() + n_val, idx.end());
  return ds;
}

namespace {

// Forward pass in double precision (training path). Keeps activations when
// acts != nullptr for the backward pass.
Eigen::VectorXd forward_f64(const Mlp &net, const Eigen::MatrixXd &Xn,
                            std::vector<Eigen::MatrixXd> *acts) {
  Eigen::MatrixXd a = Xn;
  if (acts) acts->push_back(a);
  const int L = net.num_layers();
  for (int l = 0; l < L; ++l) {
    Eigen::MatrixXd z = (a * net.W[l].transpose()).rowwise() + net.b[l].transpose();
    if (l + 1 < L) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (acts && l + 1 < L) acts->push_back(a);
  }
  return a.col(0);
}

Eigen::MatrixXd normalize_rows(const Mlp &net, const Eigen::MatrixXd &X) {
  return (X.rowwise() - net.in_mean.transpose()).array().rowwise() /
         net.in_std.transpose().array();
}

} // namespace

double mlp_loss(const Mlp &net, const Eigen::MatrixXd &X, const Eigen::VectorXd &h,
                const TrainConfig &cfg, MlpGrad *grad) {
  if (X.rows() == 0) throw ConfigError("loss over an empty batch");
  const int L = net.num_layers();
  const double B = static_cast<double>(X.rows());

  Eigen::MatrixXd Xn = normalize_rows(net, X);
  std::vector<Eigen::MatrixXd> acts;
  Eigen::VectorXd pred = forward_f64(net, Xn, grad ? &acts : nullptr);

  Eigen::VectorXd err = pred - h;
  double mse = err.squaredNorm() / B;
  double penalty = 0.0;
  Eigen::VectorXd dpred = 2.0 * err / B;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (h[i] > 0.0) {
      double hinge = cfg.epsilon - pred[i];
      if (hinge > 0.0) {
        penalty += hinge;
        if (grad) dpred[i] -= cfg.lambda / B;
      }
    }
  }
  penalty *= cfg.lambda / B;
  double total = mse + penalty;
  if (!grad) return total;

  grad->dW.assign(L, Eigen::MatrixXd());
  grad->db.assign(L, Eigen::VectorXd());
  Eigen::MatrixXd delta = dpred; // B x 1
  for (int l = L - 1; l >= 0; --l) {
    const Eigen::MatrixXd &a_in = acts[l];
    grad->dW[l] = delta.transpose() * a_in;
    grad->db[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * net.W[l];
      delta = ((acts[l].array() > 0.0).cast<double>() * back.array()).matrix();
    }
  }
  return total;
}

Mlp train(const Dataset &data, const TrainConfig &cfg, TrainReport *report) {
  cfg.validate();
  if (data.train_idx.empty() || data.val_idx.empty())
    throw ConfigError("dataset needs train and validation splits");
  auto t_start = std::chrono::steady_clock::now();

  const int in_dim = static_cast<int>(data.X.cols());
  std::vector<int> widths;
  widths.push_back(in_dim);
  for (int hdim : cfg.hidden) widths.push_back(hdim);
  widths.push_back(1);

  Mlp net;
  net.in_mean = data.in_mean;
  net.in_std = data.in_std;
  net.in_lo = data.in_lo;
  net.in_hi = data.in_hi;
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    std::uniform_real_distribution<double> uni(-bound, bound);
    Eigen::MatrixXd W(widths[l + 1], widths[l]);
    Eigen::VectorXd b(widths[l + 1]);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = uni(rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = uni(rng);
    net.W.push_back(std::move(W));
    net.b.push_back(std::move(b));
  }

  auto gather = [&](const std::vector<std::size_t> &idx, std::size_t lo, std::size_t hi,
                    Eigen::MatrixXd &X, Eigen::VectorXd &h) {
    X.resize(hi - lo, in_dim);
    h.resize(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      X.row(i - lo) = data.X.row(static_cast<Eigen::Index>(idx[i]));
      h[i - lo] = data.h[static_cast<Eigen::Index>(idx[i])];
    }
  };

  Eigen::MatrixXd val_X;
  Eigen::VectorXd val_h;
  gather(data.val_idx, 0, data.val_idx.size(), val_X, val_h);
  auto val_loss = [&](const Mlp &m) { return mlp_loss(m, val_X, val_h, cfg, nullptr); };

  // Adam state.
  const int L = net.num_layers();
  std::vector<Eigen::MatrixXd> mW(L), vW(L);
  std::vector<Eigen::VectorXd> mb(L), vb(L);
  for (int l = 0; l < L; ++l) {
    mW[l] = Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols());
    vW[l] = mW[l];
    mb[l] = Eigen::VectorXd::Zero(net.b[l].size());
    vb[l] = mb[l];
  }

  double initial_val = val_loss(net);
  double best_val = initial_val;
  Mlp best = net;
  int best_epoch = 0;
  int since_best = 0;
  long step_count = 0;
  std::vector<std::size_t> order = data.train_idx;
  double train_loss = 0.0;
  MlpGrad grad;
  Eigen::MatrixXd bx;
  Eigen::VectorXd bh;

  int epoch = 0;
  for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double acc = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
      gather(order, lo, hi, bx, bh);
      acc += mlp_loss(net, bx, bh, cfg, &grad);
      ++batches;
      ++step_count;
      double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count));
      double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count));
      for (int l = 0; l < L; ++l) {
        mW[l] = cfg.beta1 * mW[l] + (1.0 - cfg.beta1) * grad.dW[l];
        vW[l] = (cfg.beta2 * vW[l].array() +
                 (1.0 - cfg.beta2) * grad.dW[l].array().square())
                    .matrix();
        net.W[l].array() -= cfg.learning_rate * (mW[l].array() / bc1) /
                            ((vW[l].array() / bc2).sqrt() + cfg.adam_eps);
        mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * grad.db[l];
        vb[l] = (cfg.beta2 * vb[l].array() +
                 (1.0 - cfg.beta2) * grad.db[l].array().square())
                    .matrix();
        net.b[l].array() -= cfg.learning_rate * (mb[l].array() / bc1) /
                            ((vb[l].array() / bc2).sqrt() + cfg.adam_eps);
      }
    }
    train_loss = acc / static_cast<double>(std::max<std::size_t>(batches, 1));

    double vl = val_loss(net);
    if (vl > 10.0 * std::max(initial_val, 1e-12))
      throw NumericalError("training diverged: validation loss " + std::to_string(vl) +
                           " exceeds 10x the initial " + std::to_string(initial_val));
    if (vl < best_val) {
      best_val = vl;
      best = net;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  best.refresh_inference_cache();
  if (report) {
    report->initial_val_loss = initial_val;
    report->best_val_loss = best_val;
    report->final_train_loss = train_loss;
    report->epochs_run = std::min(epoch, cfg.epochs);
    report->best_epoch = best_epoch;
    Eigen::VectorXd pred = forward_f64(best, normalize_rows(best, val_X), nullptr);
    report->val_mse_raw = (pred - val_h).squaredNorm() / static_cast<double>(val_h.size());
    report->val_mse_unit = report->val_mse_raw / (data.h_std * data.h_std);
    std::size_t unsafe = 0, false_safe = 0;
    for (Eigen::Index i = 0; i < val_h.size(); ++i)
      if (val_h[i] > cfg.epsilon) {
        ++unsafe;
        if (pred[i] < 0.0) ++false_safe;
      }
    report->false_safe_rate =
        unsafe ? static_cast<double>(false_safe) / static_cast<double>(unsafe) : 0.0;
    report->wall_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  }
  return best;
}

Eigen::VectorXd evaluate_batch(const Mlp &net, const Eigen::MatrixXd &points,
                               int *ood_count) {
  if (points.cols() != net.input_dim())
    throw ConfigError("evaluate_batch: input dimension mismatch");
  if (!net.cache_valid) net.refresh_inference_cache();
  const Eigen::Index n = points.rows();
  if (ood_count) {
    int cnt = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < points.cols(); ++c)
        if (points(i, c) < net.in_lo[c] - 1e-9 || points(i, c) > net.in_hi[c] + 1e-9) {
          ++cnt;
          break;
        }
    *ood_count = cnt;
  }

  Eigen::VectorXf mean = net.in_mean.cast<float>();
  Eigen::VectorXf istd = net.in_std.cast<float>().cwiseInverse();
  Eigen::VectorXd out(n);
  const int L = net.num_layers();

  parallel_for_chunks(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
    if (lo >= hi) return;
    const Eigen::Index rows = static_cast<Eigen::Index>(hi - lo);
    Eigen::MatrixXf a = points.middleRows(static_cast<Eigen::Index>(lo), rows).cast<float>();
    a = (a.rowwise() - mean.transpose()).array().rowwise() *
        istd.transpose().array();
    for (int l = 0; l < L; ++l) {
      Eigen::MatrixXf z = (a * net.Wf[l].transpose()).rowwise() + net.bf[l].transpose();
      if (l + 1 < L) z = z.cwiseMax(0.0f);
      a = std::move(z);
    }
    for (Eigen::Index i = 0; i < rows; ++i)
      out[static_cast<Eigen::Index>(lo) + i] = static_cast<double>(a(i, 0));
  }, batch_eval_threads());
  return out;
}

double evaluate(const Mlp &net, double t, const Eigen::VectorXd &x, bool *ood) {
  Eigen::MatrixXd p(1, 1 + x.size());
  p(0, 0) = t;
  for (Eigen::Index d = 0; d < x.size(); ++d) p(0, 1 + d) = x[d];
  int cnt = 0;
  Eigen::VectorXd v = evaluate_batch(net, p, ood ? &cnt : nullptr);
  if (ood) *ood = cnt > 0;
  return v[0];
}

Eigen::VectorXd evaluate_grid_slice(const Mlp &net, const Grid &grid, double t) {
  const std::size_t nn = grid.num_nodes();
  Eigen::MatrixXd pts(nn, 1 + grid.dim());
  for (std::size_t i = 0; i < nn; ++i) {
    pts(static_cast<Eigen::Index>(i), 0) = t;
    Eigen::VectorXd x = grid.node_point(i);
    for (int d = 0; d < grid.dim(); ++d) pts(static_cast<Eigen::Index>(i), 1 + d) = x[d];
  }
  return evaluate_batch(net, pts);
}

namespace {
template <typename T> void wraw(std::ofstream &os, const T &v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}
template <typename T> T rraw(std::ifstream &is) {
  T v;
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) throw ConfigError("truncated network file");
  return v;
}
} // namespace

void save_mlp(const Mlp &net, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os.write("MLP1", 4);
  wraw<std::uint32_t>(os, 1u);
  wraw<std::uint32_t>(os, static_cast<std::uint32_t>(net.num_layers() + 1));
  wraw<std::uint32_t>(os, static_cast<std::uint32_t>(net.input_dim()));
  for (const auto &w : net.W) wraw<std::uint32_t>(os, static_cast<std::uint32_t>(w.rows()));
  for (int c = 0; c < net.input_dim(); ++c) {
    wraw<double>(os, net.in_mean[c]);
    wraw<double>(os, net.in_std[c]);
    wraw<double>(os, net.in_lo[c]);
    wraw<double>(os, net.in_hi[c]);
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto &w = net.W[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        wraw<float>(os, static_cast<float>(w(i, j)));
    for (Eigen::Index i = 0; i < net.b[l].size(); ++i)
      wraw<float>(os, static_cast<float>(net.b[l][i]));
  }
  if (!os) throw ConfigError("write failed: " + path);
}

Mlp load_mlp(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open network file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::strncmp(magic, "MLP1", 4) != 0)
    throw ConfigError("not a network file: " + path);
  if (rraw<std::uint32_t>(is) != 1u) throw ConfigError("unsupported network file version");
  auto n_sizes = rraw<std::uint32_t>(is);
  if (n_sizes < 2 || n_sizes > 64) throw ConfigError("bad layer count in network file");
  std::vector<int> sizes(n_sizes);
  for (auto &s : sizes) s = static_cast<int>(rraw<std::uint32_t>(is));
  Mlp net;
  const int in_dim = sizes[0];
  net.in_mean.resize(in_dim);
  net.in_std.resize(in_dim);
  net.in_lo.resize(in_dim);
  net.in_hi.resize(in_dim);
  for (int c = 0; c < in_dim; ++c) {
    net.in_mean[c] = rraw<double>(is);
    net.in_std[c] = rraw<double>(is);
    net.in_lo[c] = rraw<double>(is);
    net.in_hi[c] = rraw<double>(is);
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Eigen::MatrixXd W(sizes[l + 1], sizes[l]);
    Eigen::VectorXd b(sizes[l + 1]);
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j)
        W(i, j) = static_cast<double>(rraw<float>(is));
    for (Eigen::Index i = 0; i < b.size(); ++i)
      b[i] = static_cast<double>(rraw<float>(is));
    net.W.push_back(std::move(W));
    net.b.push_back(std::move(b));
  }
  net.refresh_inference_cache();
  return net;
}

SurrogateMetrics surrogate_metrics(const Mlp &net, const Dataset &data,
                                   const std::vector<std::size_t> &subset,
                                   double epsilon, double band) {
  SurrogateMetrics m;
  if (subset.empty()) return m;
  Eigen::MatrixXd X(subset.size(), data.X.cols());
  Eigen::VectorXd h(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = data.X.row(static_cast<Eigen::Index>(subset[i]));
    h[static_cast<Eigen::Index>(i)] = data.h[static_cast<Eigen::Index>(subset[i])];
  }
  Eigen::VectorXd pred = evaluate_batch(net, X);
  m.n = subset.size();
  m.mse_raw = (pred - h).squaredNorm() / static_cast<double>(h.size());
  m.mse_unit = m.mse_raw / (data.h_std * data.h_std);
  std::size_t unsafe = 0, false_safe = 0, off_band = 0, agree = 0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (h[i] > epsilon) {
      ++unsafe;
      if (pred[i] < 0.0) ++false_safe;
    }
    if (std::abs(h[i]) >= band) {
      ++off_band;
      if ((pred[i] < 0.0) == (h[i] < 0.0)) ++agree;
    } else {
      ++m.band_excluded;
    }
  }
  m.false_safe_rate = unsafe ? static_cast<double>(false_safe) / unsafe : 0.0;
  m.sign_agreement = off_band ? static_cast<double>(agree) / off_band : 1.0;
  return m;
}

} // namespace stlreach
