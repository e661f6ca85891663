#include "connselect/sample_selection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "connselect/diagnostics.hpp"
#include "connselect/parallel.hpp"

namespace connselect {
namespace {

std::vector<SpdMatrix> regularize_all(std::span<const Subject> subjects, double mu) {
  std::vector<SpdMatrix> points;
  points.reserve(subjects.size());
  for (const auto& s : subjects) points.push_back(regularize(s.connectome, mu));
  return points;
}

void validate(std::size_t n, const SelectionConfig& config) {
  if (n == 0) throw ValidationError("sample selection: empty training set");
  if (config.folds < 2) {
    throw ValidationError(fmt::format("sample selection: need at least 2 folds, got {}", config.folds));
  }
  if (static_cast<std::size_t>(config.folds) > n) {
    throw ValidationError(fmt::format("sample selection: {} folds exceed {} training samples",
                                      config.folds, n));
  }
  if (config.k < 1 || static_cast<std::size_t>(config.k) > n) {
    throw ValidationError(
        fmt::format("sample selection: k = {} must lie in [1, {}]", config.k, n));
  }
  const int extracted = config.extracted();
  if (extracted < 1 || static_cast<std::size_t>(extracted) > n) {
    throw ValidationError(
        fmt::format("sample selection: select count {} must lie in [1, {}]", extracted, n));
  }
  if (!(config.ridge_lambda >= 0.0)) {
    throw ValidationError("sample selection: ridge lambda must be nonnegative");
  }
}

}  // namespace

std::int64_t FrequencyMap::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::vector<IndexList> kfold_indices(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError(fmt::format("k-fold: need at least 2 folds, got {}", folds));
  if (static_cast<std::size_t>(folds) > n) {
    throw ValidationError(fmt::format("k-fold: {} folds exceed {} samples", folds, n));
  }
  IndexList order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_folds = static_cast<std::size_t>(folds);
  const std::size_t base = n / n_folds;
  const std::size_t extra = n % n_folds;
  std::vector<IndexList> out(n_folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < n_folds; ++f) {
    const std::size_t len = base + (f < extra ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(out[f].begin(), out[f].end());
    pos += len;
  }
  return out;
}

PreparedCohort::PreparedCohort(std::span<const Subject> subjects, Target target, double mu)
    : points_(regularize_all(subjects, mu)), logs_(points_) {
  scores_.reserve(subjects.size());
  for (const auto& s : subjects) {
    const double v = s.score(target);
    if (!std::isfinite(v)) {
      throw ValidationError(fmt::format("subject '{}' has a non-finite {} score", s.id, to_string(target)));
    }
    scores_.push_back(v);
  }
}

FeatureVector PreparedCohort::feature(std::size_t from, std::size_t to, FeatureMethod method) const {
  return pair_feature(points_.at(from), points_.at(to), logs_.tangent(from, to), method);
}

PairDesign build_in_group_design(const PreparedCohort& cohort, std::span<const std::size_t> train_in,
                                 FeatureMethod method) {
  const std::size_t n = train_in.size();
  if (n < 2) {
    throw ValidationError(fmt::format("in-group design needs at least 2 subjects, got {}", n));
  }
  PairDesign design;
  const std::size_t rows = n * (n - 1) / 2;
  design.pairs.reserve(rows);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) design.pairs.emplace_back(train_in[a], train_in[b]);
  }
  design.x.resize(static_cast<Eigen::Index>(rows), feature_length(method, cohort.dim()));
  design.y.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto [i, j] = design.pairs[r];
    const auto row = static_cast<Eigen::Index>(r);
    design.x.row(row) = cohort.feature(i, j, method).values.transpose();
    design.y(row) = std::abs(cohort.score(j) - cohort.score(i));
  }
  return design;
}

std::vector<std::int64_t> score_holdout(const LinearModel& model, const PreparedCohort& cohort,
                                        std::span<const std::size_t> train_in,
                                        std::span<const std::size_t> holdout,
                                        FeatureMethod method, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > train_in.size()) {
    throw ValidationError(fmt::format("score_holdout: k = {} must lie in [1, {}]", k, train_in.size()));
  }
  std::vector<std::int64_t> increments(cohort.size(), 0);
  std::vector<std::pair<double, std::size_t>> ranked(train_in.size());
  for (const std::size_t l : holdout) {
    for (std::size_t a = 0; a < train_in.size(); ++a) {
      const std::size_t j = train_in[a];
      ranked[a] = {model.predict(cohort.feature(j, l, method).values), j};
    }
    std::partial_sort(ranked.begin(), ranked.begin() + k, ranked.end());
    for (int t = 0; t < k; ++t) ++increments[ranked[static_cast<std::size_t>(t)].second];
  }
  return increments;
}

IndexList top_by_frequency(const FrequencyMap& frequencies, int count) {
  const auto& counts = frequencies.counts;
  if (count < 0 || static_cast<std::size_t>(count) > counts.size()) {
    throw ValidationError(fmt::format("cannot extract {} of {} samples", count, counts.size()));
  }
  IndexList order(counts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

SelectionResult select_samples(std::span<const Subject> training, const SelectionConfig& config) {
  validate(training.size(), config);
  return select_samples(training, config, kfold_indices(training.size(), config.folds, config.seed));
}

SelectionResult select_samples(std::span<const Subject> training, const SelectionConfig& config,
                               const std::vector<IndexList>& folds) {
  const std::size_t n = training.size();
  validate(n, config);

  std::vector<int> seen(n, 0);
  for (const auto& fold : folds) {
    for (const std::size_t i : fold) {
      if (i >= n || seen[i]++) throw ValidationError("sample selection: folds are not a partition");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ValidationError("sample selection: folds do not cover the training set");
  }

  const PreparedCohort cohort(training, config.target, config.mu);

  std::vector<std::vector<std::int64_t>> fold_counts(folds.size());
  std::vector<double> fold_r2(folds.size(), 0.0);
  parallel_for(folds.size(), [&](std::size_t f) {
    IndexList train_in;
    train_in.reserve(n - folds[f].size());
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train_in.insert(train_in.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_in.begin(), train_in.end());
    const PairDesign design = build_in_group_design(cohort, train_in, config.method);
    const LinearModel model = fit_linear(design.x, design.y, config.ridge_lambda);
    fold_r2[f] = r_squared(model, design.x, design.y);
    const int picks = std::min(config.k, static_cast<int>(train_in.size()));
    fold_counts[f] = score_holdout(model, cohort, train_in, folds[f], config.method, picks);
  });

  SelectionResult result;
  result.frequencies.counts.assign(n, 0);
  for (const auto& counts : fold_counts) {
    for (std::size_t i = 0; i < n; ++i) result.frequencies.counts[i] += counts[i];
  }
  result.fold_r_squared = std::move(fold_r2);
  result.selected = top_by_frequency(result.frequencies, config.extracted());
  return result;
}

}  // namespace connselect
