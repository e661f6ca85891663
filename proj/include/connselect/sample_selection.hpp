#pragma once

// Learning-based sample selection over Log-Euclidean tangent features.
//
// The training set is split into N inner folds. For each fold the remaining
// subjects form the train-in group: a linear map from pair features to the
// absolute score difference is fitted on all train-in pairs, then applied to
// every (train-in, holdout) pair. For each holdout subject the k train-in
// subjects with the smallest predicted difference gain one count. After all
// folds the subjects with the highest counts are selected.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "connselect/dataset.hpp"
#include "connselect/graph_features.hpp"
#include "connselect/linear_model.hpp"
#include "connselect/spd_manifold.hpp"

namespace connselect {

using IndexList = std::vector<std::size_t>;

struct SelectionConfig {
  int folds = 3;
  int k = 5;
  FeatureMethod method = FeatureMethod::TangentMatrix;
  Target target = Target::Fiq;
  std::uint64_t seed = 0;
  double ridge_lambda = 0.0;
  /// Number of samples extracted at the end; defaults to k.
  std::optional<int> select_count;
  double mu = kDefaultMu;

  int extracted() const { return select_count.value_or(k); }
};

struct FrequencyMap {
  /// counts[i] belongs to training index i.
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
};

struct SelectionResult {
  /// Training indices by descending count, ties by ascending index.
  IndexList selected;
  FrequencyMap frequencies;
  /// Training R^2 of the difference regressor, one entry per fold.
  std::vector<double> fold_r_squared;
};

/// Seeded partition of 0..n-1 into N folds; the first n mod N folds hold one
/// extra element. Each fold is sorted ascending.
std::vector<IndexList> kfold_indices(std::size_t n, int folds, std::uint64_t seed);

/// Regularized SPD points and cached logarithms of a training set.
class PreparedCohort {
 public:
  PreparedCohort(std::span<const Subject> subjects, Target target, double mu = kDefaultMu);

  std::size_t size() const { return points_.size(); }
  Eigen::Index dim() const { return points_.empty() ? 0 : points_.front().dim(); }
  const SpdMatrix& point(std::size_t i) const { return points_.at(i); }
  const LogCache& logs() const { return logs_; }
  double score(std::size_t i) const { return scores_.at(i); }

  /// Feature of the pair with the tangent oriented from `from` to `to`.
  FeatureVector feature(std::size_t from, std::size_t to, FeatureMethod method) const;

 private:
  std::vector<SpdMatrix> points_;
  LogCache logs_;
  std::vector<double> scores_;
};

struct PairDesign {
  Matrix x;
  Vector y;
  /// (i, j) cohort indices of each row, i before j in train-in order.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// One row per unordered train-in pair, tangent oriented from the earlier to
/// the later position; the target is the absolute score difference.
PairDesign build_in_group_design(const PreparedCohort& cohort, std::span<const std::size_t> train_in,
                                 FeatureMethod method);

/// For every holdout subject, picks the k train-in subjects with the smallest
/// predicted difference (ties by ascending index) and returns per-cohort-index
/// increments.
std::vector<std::int64_t> score_holdout(const LinearModel& model, const PreparedCohort& cohort,
                                        std::span<const std::size_t> train_in,
                                        std::span<const std::size_t> holdout,
                                        FeatureMethod method, int k);

/// Top `count` indices by descending count, ties by ascending index.
IndexList top_by_frequency(const FrequencyMap& frequencies, int count);

SelectionResult select_samples(std::span<const Subject> training, const SelectionConfig& config);

/// Same as above with caller-provided folds (a partition of the training set).
SelectionResult select_samples(std::span<const Subject> training, const SelectionConfig& config,
                               const std::vector<IndexList>& folds);

}  // namespace connselect
