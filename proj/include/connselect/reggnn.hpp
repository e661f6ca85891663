#pragma once

// Two-layer graph-convolutional regressor with a linear head.
//
//   A     = D^-1/2 (P + I) D^-1/2,  D = diag of the row sums of P + I
//   H1    = dropout(ReLU(A W0))          d x hidden   (input features are I)
//   H2    = ReLU(A H1 W1)                d x 1
//   y_hat = fc . H2 + bias
//
// Training minimizes the squared error with Adam, one sample per step.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "connselect/spd_manifold.hpp"

namespace connselect {

struct RegGnnHyper {
  Eigen::Index dim = 0;
  Eigen::Index hidden = 64;
  double dropout = 0.1;
  double mu = kDefaultMu;
  ClampMode clamp = ClampMode::Entries;
};

struct RegGnnModel {
  RegGnnHyper hyper;
  Matrix w0;          // dim x hidden
  Vector w1;          // hidden
  Vector fc_weights;  // dim
  double fc_bias = 0.0;

  static RegGnnModel zeros(const RegGnnHyper& hyper);
  /// Throws ValidationError when shapes disagree with the hyperparameters or
  /// a parameter is non-finite.
  void validate() const;
};

/// Same layout as the model; used for gradients and Adam moments.
struct RegGnnParams {
  Matrix w0;
  Vector w1;
  Vector fc_weights;
  double fc_bias = 0.0;

  static RegGnnParams zeros_like(const RegGnnModel& model);
};

struct AdamState {
  RegGnnParams first_moment;
  RegGnnParams second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros_like(const RegGnnModel& model);
};

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  double dropout = 0.1;
  Eigen::Index hidden = 64;
  double mu = kDefaultMu;
  ClampMode clamp = ClampMode::Entries;
  std::uint64_t seed = 0;
};

struct TrainingSample {
  Connectome connectome;
  double score = 0.0;
};

/// Symmetric normalization of P + I. Throws ValidationError on a nonpositive
/// degree.
Matrix normalize_adjacency(const Matrix& p);
Matrix normalize_adjacency(const SpdMatrix& p);

/// normalize_adjacency(clamp_negative(C) + mu I), the network input.
Matrix model_input(const Connectome& c, double mu, ClampMode clamp);

/// Inverted-dropout mask for H1: entries are 0 or 1 / (1 - rate).
Matrix sample_dropout_mask(Eigen::Index dim, Eigen::Index hidden, double rate, std::mt19937_64& rng);

/// Activations of one forward pass.
struct ForwardTrace {
  Matrix pre1;    // A W0
  Matrix h1;      // after ReLU and dropout
  Vector pre2;    // A H1 W1
  Vector h2;      // ReLU(pre2)
  double prediction = 0.0;
};

ForwardTrace forward_trace(const RegGnnModel& model, const Matrix& adjacency,
                           const Matrix* dropout_mask = nullptr);
double forward(const RegGnnModel& model, const Matrix& adjacency,
               const Matrix* dropout_mask = nullptr);

struct LossAndGrads {
  double loss = 0.0;
  RegGnnParams grads;
};

/// Squared error and its gradient. Weight decay adds 2 * wd * theta to the
/// weight gradients (not the bias); the returned loss excludes that penalty.
LossAndGrads loss_and_grads(const RegGnnModel& model, const Matrix& adjacency, double target,
                            const Matrix* dropout_mask = nullptr, double weight_decay = 0.0);

/// One bias-corrected Adam update in place.
void adam_step(RegGnnModel& model, const RegGnnParams& grads, AdamState& state,
               double learning_rate);

/// Seeded uniform Glorot initialization with zero bias.
RegGnnModel init_model(const RegGnnHyper& hyper, std::mt19937_64& rng);

/// Trains on the samples in the given order (shuffled per epoch by the
/// seeded generator). Targets are standardized with the sample mean and
/// population std while training; the returned head maps back to the original
/// score scale. Throws NumericalError on a non-finite loss.
RegGnnModel train(std::span<const TrainingSample> samples, const TrainConfig& config);

/// Dropout-free prediction for one connectome, preprocessed with the
/// model's mu and clamp mode.
double predict(const RegGnnModel& model, const Connectome& c);

struct RoiWeight {
  Eigen::Index roi = 0;
  double weight = 0.0;
};

/// ROIs by descending |weight|, ties by ascending index.
std::vector<RoiWeight> rank_rois(const Vector& weights, Eigen::Index top_m);
std::vector<RoiWeight> extract_roi_importance(const RegGnnModel& model, Eigen::Index top_m);

}  // namespace connselect
