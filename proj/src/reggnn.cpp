#include "connselect/reggnn.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "connselect/diagnostics.hpp"

namespace connselect {
namespace {

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix relu_gate(const Matrix& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

void require_shapes(const RegGnnModel& model, const Matrix& adjacency, const Matrix* mask) {
  const Eigen::Index d = model.hyper.dim;
  if (adjacency.rows() != d || adjacency.cols() != d) {
    throw ValidationError(fmt::format("adjacency is {}x{}, model expects {}x{}", adjacency.rows(),
                                      adjacency.cols(), d, d));
  }
  if (model.w0.rows() != d || model.w0.cols() != model.hyper.hidden ||
      model.w1.size() != model.hyper.hidden || model.fc_weights.size() != d) {
    throw ValidationError("model parameter shapes are inconsistent");
  }
  if (mask && (mask->rows() != d || mask->cols() != model.hyper.hidden)) {
    throw ValidationError(fmt::format("dropout mask is {}x{}, expected {}x{}", mask->rows(),
                                      mask->cols(), d, model.hyper.hidden));
  }
}

void glorot_fill(Eigen::Ref<Matrix> target, double fan_in, double fan_out, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (Eigen::Index i = 0; i < target.rows(); ++i) {
    for (Eigen::Index j = 0; j < target.cols(); ++j) target(i, j) = uniform(rng);
  }
}

template <typename Fn>
void for_each_param(RegGnnModel& model, const RegGnnParams& grads, AdamState& state, Fn fn) {
  fn(model.w0.array(), grads.w0.array(), state.first_moment.w0.array(),
     state.second_moment.w0.array());
  fn(model.w1.array(), grads.w1.array(), state.first_moment.w1.array(),
     state.second_moment.w1.array());
  fn(model.fc_weights.array(), grads.fc_weights.array(), state.first_moment.fc_weights.array(),
     state.second_moment.fc_weights.array());
  Eigen::Map<Eigen::ArrayXd> bias(&model.fc_bias, 1);
  Eigen::Map<const Eigen::ArrayXd> bias_grad(&grads.fc_bias, 1);
  Eigen::Map<Eigen::ArrayXd> bias_m(&state.first_moment.fc_bias, 1);
  Eigen::Map<Eigen::ArrayXd> bias_v(&state.second_moment.fc_bias, 1);
  fn(bias, bias_grad, bias_m, bias_v);
}

}  // namespace

RegGnnModel RegGnnModel::zeros(const RegGnnHyper& hyper) {
  if (hyper.dim < 1 || hyper.hidden < 1) {
    throw ValidationError(fmt::format("invalid model shape: dim {}, hidden {}", hyper.dim, hyper.hidden));
  }
  RegGnnModel m;
  m.hyper = hyper;
  m.w0 = Matrix::Zero(hyper.dim, hyper.hidden);
  m.w1 = Vector::Zero(hyper.hidden);
  m.fc_weights = Vector::Zero(hyper.dim);
  return m;
}

void RegGnnModel::validate() const {
  if (hyper.dim < 1 || hyper.hidden < 1) throw ValidationError("model dimensions must be positive");
  if (!(hyper.dropout >= 0.0 && hyper.dropout < 1.0)) {
    throw ValidationError(fmt::format("dropout {} outside [0, 1)", hyper.dropout));
  }
  if (!(hyper.mu > 0.0)) throw ValidationError("model mu must be positive");
  if (w0.rows() != hyper.dim || w0.cols() != hyper.hidden || w1.size() != hyper.hidden ||
      fc_weights.size() != hyper.dim) {
    throw ValidationError("model parameter shapes are inconsistent");
  }
  if (!w0.allFinite() || !w1.allFinite() || !fc_weights.allFinite() || !std::isfinite(fc_bias)) {
    throw ValidationError("model has non-finite parameters");
  }
}

RegGnnParams RegGnnParams::zeros_like(const RegGnnModel& model) {
  return {Matrix::Zero(model.w0.rows(), model.w0.cols()), Vector::Zero(model.w1.size()),
          Vector::Zero(model.fc_weights.size()), 0.0};
}

AdamState AdamState::zeros_like(const RegGnnModel& model) {
  AdamState s;
  s.first_moment = RegGnnParams::zeros_like(model);
  s.second_moment = RegGnnParams::zeros_like(model);
  return s;
}

Matrix normalize_adjacency(const Matrix& p) {
  if (p.rows() == 0 || p.rows() != p.cols()) {
    throw ValidationError("normalize_adjacency: expected a square matrix");
  }
  Matrix augmented = p;
  augmented.diagonal().array() += 1.0;
  const Vector degree = augmented.rowwise().sum();
  if (!(degree.minCoeff() > 0.0)) {
    throw ValidationError("normalize_adjacency: nonpositive node degree");
  }
  const Vector inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Matrix out = inv_sqrt.asDiagonal() * augmented * inv_sqrt.asDiagonal();
  return 0.5 * (out + out.transpose());
}

Matrix normalize_adjacency(const SpdMatrix& p) { return normalize_adjacency(p.matrix()); }

Matrix model_input(const Connectome& c, double mu, ClampMode clamp) {
  if (!(mu > 0.0)) throw ValidationError(fmt::format("mu must be positive, got {}", mu));
  Matrix p = clamp_negative(c, clamp).matrix();
  p.diagonal().array() += mu;
  return normalize_adjacency(p);
}

Matrix sample_dropout_mask(Eigen::Index dim, Eigen::Index hidden, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError(fmt::format("dropout rate {} outside [0, 1)", rate));
  }
  Matrix mask(dim, hidden);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < hidden; ++j) mask(i, j) = keep(rng) ? scale : 0.0;
  }
  return mask;
}

ForwardTrace forward_trace(const RegGnnModel& model, const Matrix& adjacency, const Matrix* dropout_mask) {
  require_shapes(model, adjacency, dropout_mask);
  ForwardTrace t;
  t.pre1 = adjacency * model.w0;
  t.h1 = relu(t.pre1);
  if (dropout_mask) t.h1 = t.h1.cwiseProduct(*dropout_mask);
  t.pre2 = adjacency * (t.h1 * model.w1);
  t.h2 = t.pre2.cwiseMax(0.0);
  t.prediction = model.fc_weights.dot(t.h2) + model.fc_bias;
  return t;
}

double forward(const RegGnnModel& model, const Matrix& adjacency, const Matrix* dropout_mask) {
  return forward_trace(model, adjacency, dropout_mask).prediction;
}

LossAndGrads loss_and_grads(const RegGnnModel& model, const Matrix& adjacency, double target,
                            const Matrix* dropout_mask, double weight_decay) {
  const ForwardTrace t = forward_trace(model, adjacency, dropout_mask);
  const double residual = t.prediction - target;
  const double g = 2.0 * residual;

  LossAndGrads out;
  out.loss = residual * residual;
  out.grads.fc_weights = g * t.h2;
  out.grads.fc_bias = g;

  const Vector d_pre2 = (g * model.fc_weights).cwiseProduct(relu_gate(t.pre2));
  const Vector back2 = adjacency.transpose() * d_pre2;
  out.grads.w1 = t.h1.transpose() * back2;

  Matrix d_pre1 = (back2 * model.w1.transpose()).cwiseProduct(relu_gate(t.pre1));
  if (dropout_mask) d_pre1 = d_pre1.cwiseProduct(*dropout_mask);
  out.grads.w0 = adjacency.transpose() * d_pre1;

  if (weight_decay != 0.0) {
    out.grads.w0 += 2.0 * weight_decay * model.w0;
    out.grads.w1 += 2.0 * weight_decay * model.w1;
    out.grads.fc_weights += 2.0 * weight_decay * model.fc_weights;
  }
  return out;
}

void adam_step(RegGnnModel& model, const RegGnnParams& grads, AdamState& state, double learning_rate) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double eps = state.epsilon;
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for_each_param(model, grads, state, [&](auto param, auto grad, auto m, auto v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.square();
    param -= learning_rate * (m / correction1) / ((v / correction2).sqrt() + eps);
  });
}

RegGnnModel init_model(const RegGnnHyper& hyper, std::mt19937_64& rng) {
  RegGnnModel m = RegGnnModel::zeros(hyper);
  const auto d = static_cast<double>(hyper.dim);
  const auto h = static_cast<double>(hyper.hidden);
  glorot_fill(m.w0, d, h, rng);
  glorot_fill(m.w1, h, 1.0, rng);
  glorot_fill(m.fc_weights, d, 1.0, rng);
  return m;
}

RegGnnModel train(std::span<const TrainingSample> samples, const TrainConfig& config) {
  if (samples.empty()) throw ValidationError("train: no training samples");
  if (config.epochs < 1) throw ValidationError("train: epochs must be at least 1");
  if (!(config.learning_rate > 0.0)) throw ValidationError("train: learning rate must be positive");
  if (!(config.weight_decay >= 0.0)) throw ValidationError("train: weight decay must be nonnegative");

  RegGnnHyper hyper;
  hyper.dim = samples.front().connectome.dim();
  hyper.hidden = config.hidden;
  hyper.dropout = config.dropout;
  hyper.mu = config.mu;
  hyper.clamp = config.clamp;

  // Fit standardized targets, then fold the affine map back into the linear
  // head. Starting from zero output, raw IQ-scale targets spend most of a
  // 100-epoch budget just moving the level.
  double mean = 0.0;
  for (const auto& s : samples) mean += s.score;
  mean /= static_cast<double>(samples.size());
  double spread = 0.0;
  for (const auto& s : samples) spread += (s.score - mean) * (s.score - mean);
  spread = std::sqrt(spread / static_cast<double>(samples.size()));
  if (!(spread > 0.0)) spread = 1.0;

  std::vector<Matrix> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.connectome.dim() != hyper.dim) throw ValidationError("train: connectome dimensions differ");
    if (!std::isfinite(s.score)) throw ValidationError("train: non-finite target score");
    inputs.push_back(model_input(s.connectome, hyper.mu, hyper.clamp));
  }

  std::mt19937_64 rng(config.seed);
  RegGnnModel model = init_model(hyper, rng);
  model.validate();
  AdamState state = AdamState::zeros_like(model);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t i : order) {
      std::optional<Matrix> mask;
      if (hyper.dropout > 0.0) mask = sample_dropout_mask(hyper.dim, hyper.hidden, hyper.dropout, rng);
      const LossAndGrads lg = loss_and_grads(model, inputs[i], (samples[i].score - mean) / spread,
                                             mask ? &*mask : nullptr, config.weight_decay);
      if (!std::isfinite(lg.loss)) {
        throw NumericalError(fmt::format("train: non-finite loss at epoch {} (sample {})", epoch, i));
      }
      adam_step(model, lg.grads, state, config.learning_rate);
    }
  }
  model.fc_weights *= spread;
  model.fc_bias = spread * model.fc_bias + mean;
  return model;
}

double predict(const RegGnnModel& model, const Connectome& c) {
  return forward(model, model_input(c, model.hyper.mu, model.hyper.clamp));
}

std::vector<RoiWeight> rank_rois(const Vector& weights, Eigen::Index top_m) {
  if (top_m < 1 || top_m > weights.size()) {
    throw ValidationError(fmt::format("top_m = {} must lie in [1, {}]", top_m, weights.size()));
  }
  std::vector<RoiWeight> all(static_cast<std::size_t>(weights.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i) all[static_cast<std::size_t>(i)] = {i, weights(i)};
  std::stable_sort(all.begin(), all.end(), [](const RoiWeight& a, const RoiWeight& b) {
    return std::abs(a.weight) > std::abs(b.weight);
  });
  all.resize(static_cast<std::size_t>(top_m));
  return all;
}

std::vector<RoiWeight> extract_roi_importance(const RegGnnModel& model, Eigen::Index top_m) {
  return rank_rois(model.fc_weights, top_m);
}

}  // namespace connselect
