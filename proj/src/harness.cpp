#include "connselect/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "connselect/diagnostics.hpp"
#include "connselect/parallel.hpp"

namespace connselect {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

enum SeedStream : std::uint64_t { kOuterStream = 0, kSelectionStream = 1, kTrainingStream = 2 };

void require_same_length(const Vector& a, const Vector& b) {
  if (a.size() == 0 || a.size() != b.size()) {
    throw ValidationError(fmt::format("metric inputs must have equal nonzero lengths ({} vs {})",
                                      a.size(), b.size()));
  }
}

void validate(const Dataset& dataset, const ExperimentConfig& config) {
  if (config.outer_folds < 2) throw ValidationError("outer folds must be at least 2");
  if (config.inner_folds < 2) throw ValidationError("inner folds must be at least 2");
  if (dataset.size() < 2 * static_cast<std::size_t>(config.outer_folds)) {
    throw ValidationError(fmt::format("dataset of {} subjects is too small for {} outer folds",
                                      dataset.size(), config.outer_folds));
  }
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// One (k, fold) cell of the outer cross-validation.
FoldResult run_cell(const Dataset& dataset, const ExperimentConfig& config,
                    const std::vector<IndexList>& folds, std::size_t fold, int k) {
  FoldResult out;
  out.fold = static_cast<int>(fold);

  IndexList training;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != fold) training.insert(training.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(training.begin(), training.end());
  std::vector<Subject> training_subjects;
  training_subjects.reserve(training.size());
  for (const std::size_t i : training) training_subjects.push_back(dataset.subjects[i]);

  auto start = Clock::now();
  IndexList chosen(training.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (config.selection) {
    SelectionConfig sc;
    sc.folds = config.inner_folds;
    sc.k = k;
    sc.method = config.method;
    sc.target = config.target;
    sc.seed = derive_seed(config.seed, kSelectionStream, fold, 0);
    sc.ridge_lambda = config.ridge_lambda;
    sc.mu = config.train.mu;
    chosen = select_samples(training_subjects, sc).selected;
    std::sort(chosen.begin(), chosen.end());
  }
  out.selection_seconds = seconds_since(start);

  std::vector<TrainingSample> samples;
  samples.reserve(chosen.size());
  for (const std::size_t i : chosen) {
    const Subject& s = training_subjects[i];
    samples.push_back({s.connectome, s.score(config.target)});
    out.selected_ids.push_back(s.id);
  }
  TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, kTrainingStream, fold, samples.size());

  start = Clock::now();
  const RegGnnModel model = train(samples, tc);
  out.training_seconds = seconds_since(start);
  out.fc_weights = model.fc_weights;

  const IndexList& test = folds[fold];
  out.predictions.resize(static_cast<Eigen::Index>(test.size()));
  out.truth.resize(static_cast<Eigen::Index>(test.size()));
  for (std::size_t t = 0; t < test.size(); ++t) {
    const Subject& s = dataset.subjects[test[t]];
    out.test_ids.push_back(s.id);
    out.predictions(static_cast<Eigen::Index>(t)) = predict(model, s.connectome);
    out.truth(static_cast<Eigen::Index>(t)) = s.score(config.target);
  }
  if (!out.predictions.allFinite()) throw NumericalError("non-finite RegGNN prediction");
  out.mae = mae(out.predictions, out.truth);
  out.rmse = rmse(out.predictions, out.truth);

  double training_mean = 0.0;
  for (const auto& s : training_subjects) training_mean += s.score(config.target);
  training_mean /= static_cast<double>(training_subjects.size());
  out.mean_predictor_mae =
      mae(Vector::Constant(out.truth.size(), training_mean), out.truth);
  return out;
}

MetricsReport assemble(const ExperimentConfig& config, int k, std::vector<FoldResult> folds) {
  MetricsReport report;
  report.method = config.method;
  report.target = config.target;
  report.selection = config.selection;
  report.k = config.selection ? k : 0;
  report.folds = std::move(folds);
  std::vector<double> maes;
  std::vector<double> rmses;
  for (const auto& f : report.folds) {
    maes.push_back(f.mae);
    rmses.push_back(f.rmse);
  }
  report.mae = summarize(maes);
  report.rmse = summarize(rmses);
  return report;
}

json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json report_json(const MetricsReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"test_ids", f.test_ids},
                     {"selected_ids", f.selected_ids},
                     {"predictions", vector_json(f.predictions)},
                     {"truth", vector_json(f.truth)},
                     {"mae", f.mae},
                     {"rmse", f.rmse},
                     {"mean_predictor_mae", f.mean_predictor_mae},
                     {"fc_weights", vector_json(f.fc_weights)},
                     {"timing",
                      {{"selection_seconds", f.selection_seconds},
                       {"training_seconds", f.training_seconds}}}});
  }
  return {{"method", std::string(to_tag(r.method))},
          {"target", std::string(to_string(r.target))},
          {"selection", r.selection},
          {"k", r.k},
          {"folds", folds},
          {"mae", summary_json(r.mae)},
          {"rmse", summary_json(r.rmse)}};
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

std::string k_label(const MetricsReport& r) { return r.selection ? std::to_string(r.k) : "all"; }

constexpr const char* kCsvHeader = "method,target,k,fold,mae,rmse,selected_ids\n";

}  // namespace

std::vector<int> default_k_values() {
  std::vector<int> ks(14);
  std::iota(ks.begin(), ks.end(), 2);
  return ks;
}

double mae(const Vector& predicted, const Vector& truth) {
  require_same_length(predicted, truth);
  return (predicted - truth).cwiseAbs().mean();
}

double rmse(const Vector& predicted, const Vector& truth) {
  require_same_length(predicted, truth);
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(truth.size()));
}

Summary summarize(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("cannot summarize an empty list");
  Summary s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t fold,
                          std::uint64_t size) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ stream);
  h = mix(h ^ fold);
  return mix(h ^ size);
}

std::vector<IndexList> outer_folds(const Dataset& dataset, const ExperimentConfig& config) {
  validate(dataset, config);
  return kfold_indices(dataset.size(), config.outer_folds, derive_seed(config.seed, kOuterStream, 0, 0));
}

MetricsReport run_experiment(const Dataset& dataset, const ExperimentConfig& config, int k) {
  const auto folds = outer_folds(dataset, config);
  std::vector<FoldResult> results(folds.size());
  parallel_for(folds.size(), [&](std::size_t f) { results[f] = run_cell(dataset, config, folds, f, k); });
  return assemble(config, k, std::move(results));
}

SweepReport k_sweep(const Dataset& dataset, const ExperimentConfig& config,
                    const std::vector<int>& k_values) {
  if (k_values.empty()) throw ValidationError("k sweep needs at least one k");
  const auto folds = outer_folds(dataset, config);
  const std::size_t n_folds = folds.size();
  std::vector<FoldResult> cells(k_values.size() * n_folds);
  parallel_for(cells.size(), [&](std::size_t c) {
    cells[c] = run_cell(dataset, config, folds, c % n_folds, k_values[c / n_folds]);
  });

  SweepReport sweep;
  std::vector<double> mean_maes;
  std::vector<double> mean_rmses;
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    std::vector<FoldResult> per_fold(std::make_move_iterator(cells.begin() + ki * n_folds),
                                     std::make_move_iterator(cells.begin() + (ki + 1) * n_folds));
    sweep.per_k.push_back(assemble(config, k_values[ki], std::move(per_fold)));
    mean_maes.push_back(sweep.per_k.back().mae.mean);
    mean_rmses.push_back(sweep.per_k.back().rmse.mean);
  }
  sweep.mae = summarize(mean_maes);
  sweep.rmse = summarize(mean_rmses);
  return sweep;
}

std::vector<RoiImportance> average_roi_importance(const std::vector<Vector>& fc_weights,
                                                  Eigen::Index top_m,
                                                  const std::vector<std::string>& roi_names) {
  if (fc_weights.empty()) throw ValidationError("no models to average");
  const Eigen::Index d = fc_weights.front().size();
  Vector mean = Vector::Zero(d);
  for (const auto& w : fc_weights) {
    if (w.size() != d) {
      throw ValidationError(fmt::format("model weight dimension mismatch: {} vs {}", w.size(), d));
    }
    mean += w;
  }
  mean /= static_cast<double>(fc_weights.size());
  if (!roi_names.empty() && static_cast<Eigen::Index>(roi_names.size()) != d) {
    throw ValidationError(fmt::format("{} ROI names for {} ROIs", roi_names.size(), d));
  }
  std::vector<RoiImportance> out;
  for (const auto& r : rank_rois(mean, top_m)) {
    out.push_back({r.roi, r.weight,
                   roi_names.empty() ? std::to_string(r.roi)
                                     : roi_names[static_cast<std::size_t>(r.roi)]});
  }
  return out;
}

std::vector<Vector> collect_fc_weights(const SweepReport& sweep) {
  std::vector<Vector> out;
  for (const auto& r : sweep.per_k) {
    for (const auto& f : r.folds) out.push_back(f.fc_weights);
  }
  return out;
}

std::string report_to_json(const MetricsReport& report) { return report_json(report).dump(2) + "\n"; }

std::string sweep_to_json(const SweepReport& sweep) {
  json per_k = json::array();
  for (const auto& r : sweep.per_k) per_k.push_back(report_json(r));
  json doc = {{"per_k", per_k},
              {"summary", {{"mae", summary_json(sweep.mae)}, {"rmse", summary_json(sweep.rmse)}}}};
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << kCsvHeader;
  for (const auto& f : report.folds) {
    out << to_tag(report.method) << ',' << to_string(report.target) << ',' << k_label(report) << ','
        << f.fold << ',' << format_double(f.mae) << ',' << format_double(f.rmse) << ','
        << join(f.selected_ids, ';') << '\n';
  }
  return out.str();
}

std::string sweep_to_csv(const SweepReport& sweep) {
  std::ostringstream out;
  out << kCsvHeader;
  for (const auto& r : sweep.per_k) {
    std::vector<std::string> lists;
    for (const auto& f : r.folds) lists.push_back(join(f.selected_ids, ';'));
    out << to_tag(r.method) << ',' << to_string(r.target) << ',' << k_label(r) << ",mean,"
        << format_double(r.mae.mean) << ',' << format_double(r.rmse.mean) << ','
        << join(lists, '|') << '\n';
  }
  return out.str();
}

std::string roi_table_csv(const std::vector<RoiImportance>& rois) {
  std::ostringstream out;
  out << "rank,roi,name,weight\n";
  for (std::size_t i = 0; i < rois.size(); ++i) {
    out << i + 1 << ',' << rois[i].roi << ',' << rois[i].name << ',' << format_double(rois[i].weight)
        << '\n';
  }
  return out.str();
}

}  // namespace connselect
