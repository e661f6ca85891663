#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "connselect/diagnostics.hpp"
#include "connselect/sample_selection.hpp"
#include "connselect/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace connselect {
namespace {

std::vector<Subject> random_subjects(int n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> iq(100.0, 15.0);
  std::vector<Subject> out;
  for (int i = 0; i < n; ++i) {
    const double fiq = iq(rng);
    out.push_back({"s" + std::to_string(i), testing::random_correlation(d, rng), fiq, fiq + 3.0});
  }
  return out;
}

std::vector<Subject> zero_noise_cohort(int n, int d, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.d = d;
  spec.noise = 0.0;
  spec.seed = seed;
  return generate_synthetic(spec).dataset.subjects;
}

TEST(KFold, EvenAndUnevenSplits) {
  const auto even = kfold_indices(6, 3, 1);
  ASSERT_EQ(even.size(), 3u);
  for (const auto& f : even) EXPECT_EQ(f.size(), 2u);

  const auto uneven = kfold_indices(7, 3, 1);
  EXPECT_EQ(uneven[0].size(), 3u);
  EXPECT_EQ(uneven[1].size(), 2u);
  EXPECT_EQ(uneven[2].size(), 2u);
}

TEST(KFold, PartitionSortedAndDeterministic) {
  const auto folds = kfold_indices(23, 4, 99);
  std::vector<std::size_t> all;
  for (const auto& f : folds) {
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    all.insert(all.end(), f.begin(), f.end());
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(23);
  std::iota(want.begin(), want.end(), std::size_t{0});
  EXPECT_EQ(all, want);
  EXPECT_EQ(folds, kfold_indices(23, 4, 99));
  EXPECT_NE(folds, kfold_indices(23, 4, 100));
}

TEST(KFold, Validation) {
  EXPECT_THROW(kfold_indices(3, 4, 0), ValidationError);
  EXPECT_THROW(kfold_indices(10, 1, 0), ValidationError);
}

TEST(Design, RowCountAndTargets) {
  auto subjects = random_subjects(5, 4, 1);
  subjects[3].fiq = subjects[1].fiq;
  const PreparedCohort cohort(subjects, Target::Fiq);
  const std::vector<std::size_t> train_in{0, 1, 2, 3, 4};
  const PairDesign design = build_in_group_design(cohort, train_in, FeatureMethod::Geometric);
  ASSERT_EQ(design.x.rows(), 10);
  ASSERT_EQ(design.pairs.size(), 10u);
  for (std::size_t r = 0; r < design.pairs.size(); ++r) {
    const auto [i, j] = design.pairs[r];
    EXPECT_LT(i, j);
    EXPECT_EQ(design.y(static_cast<Eigen::Index>(r)), std::abs(subjects[j].fiq - subjects[i].fiq));
    const double dist = le_distance(regularize(subjects[i].connectome), regularize(subjects[j].connectome));
    EXPECT_NEAR(design.x(static_cast<Eigen::Index>(r), 0), dist, 1e-12);
    if (i == 1 && j == 3) EXPECT_EQ(design.y(static_cast<Eigen::Index>(r)), 0.0);
  }
}

TEST(Design, TangentOrientedLowToHigh) {
  const auto subjects = random_subjects(3, 4, 2);
  const PreparedCohort cohort(subjects, Target::Fiq);
  const std::vector<std::size_t> train_in{2, 0};  // caller order
  const PairDesign design = build_in_group_design(cohort, train_in, FeatureMethod::TangentMatrix);
  ASSERT_EQ(design.pairs.front(), (std::pair<std::size_t, std::size_t>{2, 0}));
  EXPECT_EQ(Vector(design.x.row(0).transpose()), cohort.feature(2, 0, FeatureMethod::TangentMatrix).values);
}

TEST(Design, TooSmall) {
  const auto subjects = random_subjects(3, 4, 3);
  const PreparedCohort cohort(subjects, Target::Fiq);
  const std::vector<std::size_t> one{1};
  EXPECT_THROW(build_in_group_design(cohort, one, FeatureMethod::Geometric), ValidationError);
}

TEST(ScoreHoldout, AllSelectedWhenKIsTrainInSize) {
  const auto subjects = random_subjects(8, 4, 4);
  const PreparedCohort cohort(subjects, Target::Fiq);
  const std::vector<std::size_t> train_in{0, 2, 3, 5, 7};
  const std::vector<std::size_t> holdout{1, 4, 6};
  LinearModel model{Vector::Ones(1), 0.0};
  const auto inc = score_holdout(model, cohort, train_in, holdout, FeatureMethod::Geometric, 5);
  for (const std::size_t j : train_in) EXPECT_EQ(inc[j], 3);
  for (const std::size_t l : holdout) EXPECT_EQ(inc[l], 0);
}

TEST(ScoreHoldout, TiesGoToLowestIndex) {
  const auto subjects = random_subjects(8, 4, 5);
  const PreparedCohort cohort(subjects, Target::Fiq);
  const std::vector<std::size_t> train_in{1, 3, 4, 6};
  const std::vector<std::size_t> holdout{0, 2};
  LinearModel constant{Vector::Zero(1), 1.0};
  const auto inc = score_holdout(constant, cohort, train_in, holdout, FeatureMethod::Geometric, 2);
  EXPECT_EQ(inc[1], 2);
  EXPECT_EQ(inc[3], 2);
  EXPECT_EQ(inc[4], 0);
  EXPECT_EQ(std::accumulate(inc.begin(), inc.end(), std::int64_t{0}), 4);
}

TEST(ScoreHoldout, RejectsBadK) {
  const auto subjects = random_subjects(4, 3, 6);
  const PreparedCohort cohort(subjects, Target::Fiq);
  const std::vector<std::size_t> train_in{0, 1};
  const std::vector<std::size_t> holdout{2};
  LinearModel model{Vector::Ones(1), 0.0};
  EXPECT_THROW(score_holdout(model, cohort, train_in, holdout, FeatureMethod::Geometric, 3), ValidationError);
  EXPECT_THROW(score_holdout(model, cohort, train_in, holdout, FeatureMethod::Geometric, 0), ValidationError);
}

TEST(TopByFrequency, DescendingWithIndexTies) {
  FrequencyMap f{{3, 5, 5, 1, 3}};
  EXPECT_EQ(top_by_frequency(f, 3), (IndexList{1, 2, 0}));
  EXPECT_EQ(top_by_frequency(f, 5), (IndexList{1, 2, 0, 4, 3}));
  EXPECT_THROW(top_by_frequency(f, 6), ValidationError);
}

TEST(SelectSamples, CountingInvariant) {
  const auto subjects = random_subjects(23, 5, 7);
  for (const int folds : {3, 5}) {
    for (const int k : {2, 5, 10}) {
      SelectionConfig cfg;
      cfg.folds = folds;
      cfg.k = k;
      cfg.method = FeatureMethod::Degree;
      cfg.seed = 11;
      ScopedWarningCapture quiet;
      const SelectionResult r = select_samples(subjects, cfg);
      std::int64_t want = 0;
      for (const auto& f : kfold_indices(subjects.size(), folds, cfg.seed)) {
        want += static_cast<std::int64_t>(f.size()) * k;
      }
      EXPECT_EQ(r.frequencies.total(), want) << "N=" << folds << " k=" << k;
      EXPECT_EQ(r.selected.size(), static_cast<std::size_t>(k));
    }
  }
}

TEST(SelectSamples, IdenticalSubjectsFallToTieBreak) {
  std::mt19937_64 rng(8);
  const Connectome c = testing::random_correlation(4, rng);
  std::vector<Subject> subjects;
  for (int i = 0; i < 9; ++i) subjects.push_back({"s" + std::to_string(i), c, 100.0, 100.0});
  SelectionConfig cfg;
  cfg.k = 3;
  cfg.method = FeatureMethod::Geometric;
  ScopedWarningCapture quiet;
  const SelectionResult r = select_samples(subjects, cfg);
  EXPECT_EQ(r.selected, (IndexList{0, 1, 2}));
}

TEST(SelectSamples, Deterministic) {
  const auto subjects = random_subjects(18, 5, 9);
  SelectionConfig cfg;
  cfg.seed = 3;
  cfg.method = FeatureMethod::ConcatScaled;
  ScopedWarningCapture quiet;
  const SelectionResult a = select_samples(subjects, cfg);
  const SelectionResult b = select_samples(subjects, cfg);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.frequencies.counts, b.frequencies.counts);
  EXPECT_EQ(a.fold_r_squared, b.fold_r_squared);
}

TEST(SelectSamples, ShiftedScoresGiveIdenticalSelection) {
  auto subjects = random_subjects(15, 4, 10);
  SelectionConfig cfg;
  cfg.method = FeatureMethod::TangentMatrix;
  ScopedWarningCapture quiet;
  const SelectionResult a = select_samples(subjects, cfg);
  for (auto& s : subjects) s.fiq += 37.0;
  const SelectionResult b = select_samples(subjects, cfg);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.frequencies.counts, b.frequencies.counts);
}

TEST(SelectSamples, PermutationCovariance) {
  const auto subjects = zero_noise_cohort(20, 5, 4);
  SelectionConfig cfg;
  cfg.method = FeatureMethod::Geometric;
  cfg.k = 4;
  const auto folds = kfold_indices(subjects.size(), cfg.folds, 5);

  std::vector<std::size_t> perm(subjects.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(6));
  std::vector<Subject> shuffled;
  std::vector<std::size_t> new_pos(subjects.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.push_back(subjects[perm[i]]);
    new_pos[perm[i]] = i;
  }
  std::vector<IndexList> moved;
  for (const auto& f : folds) {
    IndexList g;
    for (const std::size_t i : f) g.push_back(new_pos[i]);
    std::sort(g.begin(), g.end());
    moved.push_back(g);
  }

  const SelectionResult a = select_samples(subjects, cfg, folds);
  const SelectionResult b = select_samples(shuffled, cfg, moved);
  std::map<std::string, std::int64_t> count_a, count_b;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    count_a[subjects[i].id] = a.frequencies.counts[i];
    count_b[shuffled[i].id] = b.frequencies.counts[i];
  }
  EXPECT_EQ(count_a, count_b);
  std::set<std::string> ids_a, ids_b;
  for (const std::size_t i : a.selected) ids_a.insert(subjects[i].id);
  for (const std::size_t i : b.selected) ids_b.insert(shuffled[i].id);
  EXPECT_EQ(ids_a, ids_b);
}

TEST(SelectSamples, MatchesTrueDifferenceOracle) {
  const auto subjects = zero_noise_cohort(30, 8, 1);
  SelectionConfig cfg;
  cfg.folds = 5;
  cfg.k = 5;
  cfg.method = FeatureMethod::Geometric;
  cfg.seed = 17;
  const SelectionResult r = select_samples(subjects, cfg);
  std::vector<double> scores;
  for (const auto& s : subjects) scores.push_back(s.fiq);
  const auto expected = oracle::selection_with_true_differences(
      scores, kfold_indices(subjects.size(), cfg.folds, cfg.seed), cfg.k, cfg.k);
  EXPECT_EQ(r.frequencies.counts, expected.counts);
  EXPECT_EQ(r.selected, expected.selected);
  for (const double r2 : r.fold_r_squared) EXPECT_GE(r2, 0.999);
}

TEST(SelectSamples, SelectCountOverridesK) {
  const auto subjects = random_subjects(12, 4, 12);
  SelectionConfig cfg;
  cfg.k = 2;
  cfg.select_count = 6;
  cfg.method = FeatureMethod::Geometric;
  EXPECT_EQ(select_samples(subjects, cfg).selected.size(), 6u);
}

TEST(SelectSamples, Validation) {
  const auto subjects = random_subjects(6, 3, 13);
  SelectionConfig cfg;
  cfg.method = FeatureMethod::Geometric;
  EXPECT_THROW(select_samples(std::span<const Subject>(), cfg), ValidationError);
  cfg.folds = 7;
  EXPECT_THROW(select_samples(subjects, cfg), ValidationError);
  cfg.folds = 3;
  cfg.k = 0;
  EXPECT_THROW(select_samples(subjects, cfg), ValidationError);
  cfg.k = 2;
  const std::vector<IndexList> overlapping{{0, 1, 2}, {2, 3, 4, 5}};
  EXPECT_THROW(select_samples(subjects, cfg, overlapping), ValidationError);
  const std::vector<IndexList> partial{{0, 1}, {2, 3}};
  EXPECT_THROW(select_samples(subjects, cfg, partial), ValidationError);
}

}  // namespace
}  // namespace connselect
