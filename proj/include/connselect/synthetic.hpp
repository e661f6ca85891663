#pragma once

// Synthetic cohorts with planted score structure.
//
// Subject i has log-matrix  B + ((score_i - ref) / score_scale) U + noise E_i,
// where B is a random symmetric base, U a unit-norm symmetric direction shared
// by the cohort, E_i unit-norm symmetric noise and ref the mean cluster
// center. Cluster c therefore sits at B + ((center_c - ref) / score_scale) U.
// At zero noise the Log-Euclidean distance between the latent SPD matrices is
// exactly |score_i - score_j| / score_scale. The connectome is the latent
// matrix rescaled to unit diagonal.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "connselect/dataset.hpp"

namespace connselect {

struct SynthSpec {
  int n = 60;
  int d = 16;
  int clusters = 3;
  /// FIQ center per cluster (IQ points). Empty means 100 +- 15 spacing.
  std::vector<double> centers;
  double within_std = 10.0;
  int outliers = 0;
  double outlier_offset = 30.0;
  double noise = 0.05;
  /// IQ points per unit of Log-Euclidean distance along the score direction.
  double score_scale = 30.0;
  /// Frobenius norm of the shared base log-matrix.
  double base_scale = 1.0;
  /// Standard deviation of VIQ around FIQ.
  double viq_jitter = 5.0;
  std::uint64_t seed = 0;

  /// Cluster centers with the default filled in. Throws ValidationError on an
  /// inconsistent spec.
  std::vector<double> resolved_centers() const;
  void validate() const;
};

struct SyntheticCohort {
  Dataset dataset;
  std::vector<int> cluster;
  std::vector<bool> outlier;
  /// expm of each planted log-matrix, before unit-diagonal rescaling.
  std::vector<SpdMatrix> latent;
};

SyntheticCohort generate_synthetic(const SynthSpec& spec);

/// Parses a flat key=value file (keys as in SynthSpec; `centers` is a comma
/// list). Lines starting with '#' are comments.
SynthSpec read_synth_spec(const std::filesystem::path& file);

/// Writes the dataset plus ground_truth.csv (id,cluster,outlier).
void write_synthetic(const SyntheticCohort& cohort, const std::filesystem::path& dir);

}  // namespace connselect
