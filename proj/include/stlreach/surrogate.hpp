#pragma once

#include "stlreach/level_set.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace stlreach {

// Fully-connected ReLU network h~(t, x). Training runs in double precision;
// inference (evaluate / evaluate_batch) runs in the float32 precision the
// network file stores.
struct Mlp {
  std::vector<Eigen::MatrixXd> W; // out x in
  std::vector<Eigen::VectorXd> b;
  Eigen::VectorXd in_mean, in_std; // input standardization
  Eigen::VectorXd in_lo, in_hi;    // training domain, for out-of-domain flags

  int input_dim() const { return W.empty() ? 0 : static_cast<int>(W.front().cols()); }
  int num_layers() const { return static_cast<int>(W.size()); }

  // Rebuilds the float32 inference cache after editing W/b.
  void refresh_inference_cache() const;

  mutable std::vector<Eigen::MatrixXf> Wf;
  mutable std::vector<Eigen::VectorXf> bf;
  mutable bool cache_valid = false;
};

struct TrainConfig {
  double epsilon = 0.1; // conservatism margin
  double lambda = 0.05; // penalty weight
  int batch_size = 1024;
  int epochs = 200;
  int patience = 20; // early stop on validation loss
  double learning_rate = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::vector<int> hidden = {128, 128, 128, 128};

  void validate() const;
};

struct Dataset {
  Eigen::MatrixXd X; // rows = records, cols = 1 + state_dim, raw (t, x)
  Eigen::VectorXd h; // raw targets, empty-region values clipped to +/- h_clip
  Eigen::VectorXd in_mean, in_std, in_lo, in_hi;
  double h_clip = 0.0;
  double h_std = 1.0; // unit-scale normalizer for reported MSE
  std::vector<std::size_t> train_idx, val_idx; // 90/10 split

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
};

// Flattens (t_j, x_k, h) records from a solved tube; subsample keeps each
// record with the given probability (seeded, deterministic). Placeholder
// "empty set" magnitudes are clipped to the finite dynamic range.
Dataset build_dataset(const LevelSetGrid &lsg, double subsample, std::uint64_t seed);

struct MlpGrad {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

// Mean squared error plus the conservative hinge penalty
// lambda * mean(1{h>0} * max(0, epsilon - h~)), with exact reverse-mode
// gradients. X rows are raw inputs.
double mlp_loss(const Mlp &net, const Eigen::MatrixXd &X, const Eigen::VectorXd &h,
                const TrainConfig &cfg, MlpGrad *grad = nullptr);

struct TrainReport {
  double initial_val_loss = 0.0;
  double best_val_loss = 0.0;
  double final_train_loss = 0.0;
  int epochs_run = 0;
  int best_epoch = 0;
  double val_mse_raw = 0.0;
  double val_mse_unit = 0.0; // raw MSE / h_std^2
  double false_safe_rate = 0.0;
  double wall_s = 0.0;
};

// Adam over minibatches, deterministic per seed; returns the snapshot with
// the lowest validation loss. Aborts when validation loss exceeds 10x its
// initial value.
Mlp train(const Dataset &data, const TrainConfig &cfg, TrainReport *report = nullptr);

// Forward pass at one point; identical (bitwise) to a singleton
// evaluate_batch call. ood flips to true for inputs outside the training
// domain.
double evaluate(const Mlp &net, double t, const Eigen::VectorXd &x, bool *ood = nullptr);

// Vectorized float32 sweep; points rows are raw (t, x). ood_count (when
// given) receives the number of out-of-domain rows.
Eigen::VectorXd evaluate_batch(const Mlp &net, const Eigen::MatrixXd &points,
                               int *ood_count = nullptr);

// Sweep over every node of a grid at fixed t.
Eigen::VectorXd evaluate_grid_slice(const Mlp &net, const Grid &grid, double t);

// Versioned binary network file (magic, sizes, normalization, f32 weights).
void save_mlp(const Mlp &net, const std::string &path);
Mlp load_mlp(const std::string &path);

struct SurrogateMetrics {
  double mse_raw = 0.0;
  double mse_unit = 0.0;
  double false_safe_rate = 0.0;  // P(h~ < 0 | h > epsilon)
  double sign_agreement = 0.0;   // off-band fraction with sign(h~) = sign(h)
  std::size_t n = 0;
  std::size_t band_excluded = 0;
};

// Metrics over the given record subset; band excludes |h| < band from the
// sign-agreement denominator.
SurrogateMetrics surrogate_metrics(const Mlp &net, const Dataset &data,
                                   const std::vector<std::size_t> &subset,
                                   double epsilon, double band);

} // namespace stlreach
