#include "connselect/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numeric>

#include "connselect/checkpoint.hpp"
#include "connselect/dataset.hpp"
#include "connselect/diagnostics.hpp"
#include "connselect/harness.hpp"
#include "connselect/sample_selection.hpp"
#include "connselect/synthetic.hpp"

namespace connselect {
namespace fs = std::filesystem;
namespace {

struct Options {
  std::string data_dir;
  std::string target = "fiq";
  std::string method = "tm";
  int k = 5;
  int folds = 3;
  int inner_folds = 3;
  std::uint64_t seed = 0;
  int epochs = 100;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  double dropout = 0.1;
  int hidden = 64;
  double mu = kDefaultMu;
  std::string clamp = "entries";
  bool no_selection = false;
  std::string output;
  double ridge = 0.0;

  // subcommand specific
  std::string spec_file;
  int k_min = 2;
  int k_max = 15;
  int top = 3;
  int select_count = 0;
  std::vector<std::string> models;
};

ExperimentConfig experiment_config(const Options& o) {
  ExperimentConfig c;
  c.outer_folds = o.folds;
  c.inner_folds = o.inner_folds;
  c.method = parse_feature_method(o.method);
  c.target = parse_target(o.target);
  c.seed = o.seed;
  c.ridge_lambda = o.ridge;
  c.selection = !o.no_selection;
  c.train.epochs = o.epochs;
  c.train.learning_rate = o.lr;
  c.train.weight_decay = o.weight_decay;
  c.train.dropout = o.dropout;
  c.train.hidden = o.hidden;
  c.train.mu = o.mu;
  c.train.clamp = parse_clamp_mode(o.clamp);
  return c;
}

SelectionConfig selection_config(const Options& o) {
  SelectionConfig s;
  s.folds = o.inner_folds;
  s.k = o.k;
  s.method = parse_feature_method(o.method);
  s.target = parse_target(o.target);
  s.seed = derive_seed(o.seed, 1, 0, 0);
  s.ridge_lambda = o.ridge;
  s.mu = o.mu;
  if (o.select_count > 0) s.select_count = o.select_count;
  return s;
}

Dataset require_dataset(const Options& o) {
  if (o.data_dir.empty()) throw ValidationError("--data-dir is required");
  return load_dataset(o.data_dir);
}

fs::path output_dir(const Options& o) {
  fs::path dir = o.output.empty() ? fs::path("connselect-out") : fs::path(o.output);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError(fmt::format("{}: cannot write file", file.string()));
  out << text;
}

int cmd_synth(const Options& o) {
  if (o.output.empty()) throw ValidationError("synth: --output is required");
  SynthSpec spec = o.spec_file.empty() ? SynthSpec{} : read_synth_spec(o.spec_file);
  const SyntheticCohort cohort = generate_synthetic(spec);
  write_synthetic(cohort, o.output);
  std::cout << fmt::format("wrote {} subjects (d = {}) to {}\n", cohort.dataset.size(),
                           cohort.dataset.dim(), o.output);
  return 0;
}

int cmd_select(const Options& o) {
  const Dataset data = require_dataset(o);
  const SelectionConfig sc = selection_config(o);
  const SelectionResult result = select_samples(data.subjects, sc);

  nlohmann::json doc;
  std::vector<std::string> ids;
  for (const std::size_t i : result.selected) ids.push_back(data.subjects[i].id);
  doc["selected_ids"] = ids;
  nlohmann::json freq = nlohmann::json::object();
  for (std::size_t i = 0; i < data.size(); ++i) freq[data.subjects[i].id] = result.frequencies.counts[i];
  doc["frequencies"] = freq;
  doc["fold_r_squared"] = result.fold_r_squared;
  doc["method"] = o.method;
  doc["target"] = o.target;
  doc["k"] = o.k;
  doc["inner_folds"] = o.inner_folds;

  for (const auto& id : ids) std::cout << id << '\n';
  if (!o.output.empty()) write_text(output_dir(o) / "selection.json", doc.dump(2) + "\n");
  return 0;
}

int cmd_train(const Options& o) {
  const Dataset data = require_dataset(o);
  const ExperimentConfig ec = experiment_config(o);
  IndexList chosen(data.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (ec.selection) {
    chosen = select_samples(data.subjects, selection_config(o)).selected;
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<TrainingSample> samples;
  for (const std::size_t i : chosen) {
    samples.push_back({data.subjects[i].connectome, data.subjects[i].score(ec.target)});
  }
  TrainConfig tc = ec.train;
  tc.seed = derive_seed(o.seed, 2, 0, samples.size());
  const RegGnnModel model = train(samples, tc);
  const fs::path file = o.output.empty() ? fs::path("model.json") : fs::path(o.output);
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  save_checkpoint(model, file);
  std::cout << fmt::format("trained on {} subjects; checkpoint written to {}\n", samples.size(),
                           file.string());
  return 0;
}

int cmd_evaluate(const Options& o) {
  const Dataset data = require_dataset(o);
  const MetricsReport report = run_experiment(data, experiment_config(o), o.k);
  const fs::path dir = output_dir(o);
  write_text(dir / "metrics.json", report_to_json(report));
  write_text(dir / "metrics.csv", report_to_csv(report));
  std::cout << fmt::format("MAE {:.3f} +- {:.3f} ({:.3f}, {:.3f})  RMSE {:.3f} +- {:.3f}\n",
                           report.mae.mean, report.mae.std, report.mae.min, report.mae.max,
                           report.rmse.mean, report.rmse.std);
  return 0;
}

std::vector<int> k_range(const Options& o) {
  if (o.k_min < 1 || o.k_max < o.k_min) {
    throw ValidationError(fmt::format("invalid k range {}..{}", o.k_min, o.k_max));
  }
  std::vector<int> ks;
  for (int k = o.k_min; k <= o.k_max; ++k) ks.push_back(k);
  return ks;
}

int cmd_sweep(const Options& o) {
  const Dataset data = require_dataset(o);
  const SweepReport sweep = k_sweep(data, experiment_config(o), k_range(o));
  const fs::path dir = output_dir(o);
  write_text(dir / "sweep.json", sweep_to_json(sweep));
  write_text(dir / "sweep.csv", sweep_to_csv(sweep));
  std::cout << fmt::format("MAE {:.3f} +- {:.3f} ({:.3f}, {:.3f})  RMSE {:.3f} +- {:.3f} ({:.3f}, {:.3f})\n",
                           sweep.mae.mean, sweep.mae.std, sweep.mae.min, sweep.mae.max,
                           sweep.rmse.mean, sweep.rmse.std, sweep.rmse.min, sweep.rmse.max);
  return 0;
}

int cmd_explain(const Options& o) {
  std::vector<Vector> weights;
  std::vector<std::string> names;
  if (!o.models.empty()) {
    for (const auto& m : o.models) weights.push_back(load_checkpoint(m).fc_weights);
    if (!o.data_dir.empty()) names = load_dataset(o.data_dir).roi_names;
  } else {
    const Dataset data = require_dataset(o);
    names = data.roi_names;
    weights = collect_fc_weights(k_sweep(data, experiment_config(o), k_range(o)));
  }
  const auto rois = average_roi_importance(weights, o.top, names);
  const std::string table = roi_table_csv(rois);
  std::cout << table;
  write_text(output_dir(o) / "roi_importance.csv", table);
  return 0;
}

void add_common(CLI::App& app, Options& o) {
  app.add_option("--data-dir", o.data_dir, "Dataset directory (subjects.csv + matrices/)");
  app.add_option("--target", o.target, "Target score")->check(CLI::IsMember({"fiq", "viq"}));
  app.add_option("--method", o.method, "Selection feature method")
      ->check(CLI::IsMember({"a", "g", "tm", "dc", "ec", "cc", "cnu", "cns"}));
  app.add_option("--k", o.k, "Number of selected samples");
  app.add_option("--folds", o.folds, "Outer cross-validation folds");
  app.add_option("--inner-folds", o.inner_folds, "Inner folds of the sample selection");
  app.add_option("--seed", o.seed, "Base random seed");
  app.add_option("--epochs", o.epochs, "Training epochs");
  app.add_option("--lr", o.lr, "Adam learning rate");
  app.add_option("--weight-decay", o.weight_decay, "L2 weight decay");
  app.add_option("--dropout", o.dropout, "Dropout rate after the first convolution");
  app.add_option("--hidden", o.hidden, "Width of the first graph convolution");
  app.add_option("--mu", o.mu, "Identity shift that makes connectomes SPD");
  app.add_option("--clamp", o.clamp, "Negative-correlation handling for RegGNN")
      ->check(CLI::IsMember({"entries", "eigenvalues"}));
  app.add_flag("--no-selection", o.no_selection, "Train on the full training split");
  app.add_option("--output", o.output, "Output directory (checkpoint file for train)");
  app.add_option("--ridge", o.ridge, "Ridge strength of the difference regressor");
  app.add_option("--select-count", o.select_count, "Samples extracted by select (default k)");
  app.add_option("--k-min", o.k_min, "Smallest k of a sweep");
  app.add_option("--k-max", o.k_max, "Largest k of a sweep");
  app.add_option("--top", o.top, "ROIs listed by explain");
  app.set_config("--config", "", "Flat key=value file mirroring the flags");
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  Options o;
  CLI::App app{"Log-Euclidean sample selection and RegGNN regression on connectomes", "connselect"};
  app.require_subcommand(1);
  add_common(app, o);

  auto* synth = app.add_subcommand("synth", "Write a synthetic cohort");
  synth->add_option("--spec", o.spec_file, "key=value synthetic cohort spec");
  auto* select = app.add_subcommand("select", "Run sample selection on a dataset");
  auto* train_cmd = app.add_subcommand("train", "Train RegGNN and write a checkpoint");
  auto* evaluate = app.add_subcommand("evaluate", "Outer cross-validation for one k");
  auto* sweep = app.add_subcommand("sweep", "Outer cross-validation over a range of k");
  auto* explain = app.add_subcommand("explain", "Rank ROIs by averaged final-layer weights");
  explain->add_option("--model", o.models, "Checkpoint(s) to average instead of running a sweep");
  for (auto* sub : {synth, select, train_cmd, evaluate, sweep, explain}) sub->fallthrough();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (select->parsed()) return cmd_select(o);
    if (train_cmd->parsed()) return cmd_train(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (explain->parsed()) return cmd_explain(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace connselect
