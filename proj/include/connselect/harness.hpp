#pragma once

// Outer cross-validation around sample selection and RegGNN training.
//
// For every outer fold the test split is held out untouched. Selection (when
// enabled) runs on the training split only, RegGNN is trained on the selected
// subjects in ascending training order, and MAE/RMSE are measured on the test
// split. Every (k, fold) cell derives its own seeds, so cells can run in any
// order or concurrently without changing the report.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "connselect/dataset.hpp"
#include "connselect/graph_features.hpp"
#include "connselect/reggnn.hpp"
#include "connselect/sample_selection.hpp"

namespace connselect {

std::vector<int> default_k_values();  // 2..15

struct ExperimentConfig {
  int outer_folds = 3;
  int inner_folds = 3;
  std::vector<int> k_values = default_k_values();
  FeatureMethod method = FeatureMethod::TangentMatrix;
  Target target = Target::Fiq;
  std::uint64_t seed = 0;
  double ridge_lambda = 0.0;
  bool selection = true;
  TrainConfig train;
};

double mae(const Vector& predicted, const Vector& truth);
double rmse(const Vector& predicted, const Vector& truth);

/// Population statistics (std with divisor n).
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct FoldResult {
  int fold = 0;
  std::vector<std::string> test_ids;
  std::vector<std::string> selected_ids;  // training subjects the model saw
  Vector predictions;
  Vector truth;
  double mae = 0.0;
  double rmse = 0.0;
  /// MAE of predicting the mean training-split score for every test subject.
  double mean_predictor_mae = 0.0;
  Vector fc_weights;
  double selection_seconds = 0.0;
  double training_seconds = 0.0;
};

struct MetricsReport {
  FeatureMethod method = FeatureMethod::TangentMatrix;
  Target target = Target::Fiq;
  bool selection = true;
  int k = 0;  // 0 when selection is off
  std::vector<FoldResult> folds;
  Summary mae;
  Summary rmse;
};

struct SweepReport {
  std::vector<MetricsReport> per_k;
  /// Statistics over the per-k mean MAE / RMSE.
  Summary mae;
  Summary rmse;
};

/// Seed for one purpose/fold/size cell; splitmix64 mixing of the inputs.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t fold,
                          std::uint64_t size);

/// Outer folds used by run_experiment.
std::vector<IndexList> outer_folds(const Dataset& dataset, const ExperimentConfig& config);

/// Runs the outer CV for one k (ignored when selection is off).
MetricsReport run_experiment(const Dataset& dataset, const ExperimentConfig& config, int k);

/// run_experiment for each k in k_values.
SweepReport k_sweep(const Dataset& dataset, const ExperimentConfig& config,
                    const std::vector<int>& k_values);

struct RoiImportance {
  Eigen::Index roi = 0;
  double weight = 0.0;
  std::string name;
};

/// Averages fully connected weight vectors, ranks by |weight| (ties by index)
/// and labels the top_m ROIs from roi_names (numeric index when empty).
std::vector<RoiImportance> average_roi_importance(const std::vector<Vector>& fc_weights,
                                                  Eigen::Index top_m,
                                                  const std::vector<std::string>& roi_names = {});

/// Every fold model's fc weights across a sweep.
std::vector<Vector> collect_fc_weights(const SweepReport& sweep);

// Serialization. JSON keeps per-fold wall-clock times under "timing"; the CSV
// columns are method,target,k,fold,mae,rmse,selected_ids with ids joined by ';'.
std::string report_to_json(const MetricsReport& report);
std::string sweep_to_json(const SweepReport& sweep);
/// One row per fold.
std::string report_to_csv(const MetricsReport& report);
/// One row per k with fold "mean": fold-averaged metrics and the per-fold id
/// lists joined by '|'.
std::string sweep_to_csv(const SweepReport& sweep);
std::string roi_table_csv(const std::vector<RoiImportance>& rois);

}  // namespace connselect
