#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "connselect/spd_manifold.hpp"

namespace connselect {

enum class Target { Fiq, Viq };

std::string_view to_string(Target target);
Target parse_target(std::string_view text);

struct Subject {
  std::string id;
  Connectome connectome;
  double fiq = 0.0;
  double viq = 0.0;

  double score(Target target) const { return target == Target::Fiq ? fiq : viq; }
};

/// Indexed cohort. All connectomes share one dimension.
struct Dataset {
  std::vector<Subject> subjects;
  /// Optional ROI labels, indexed by ROI; empty when no label table exists.
  std::vector<std::string> roi_names;

  std::size_t size() const { return subjects.size(); }
  Eigen::Index dim() const { return subjects.empty() ? 0 : subjects.front().connectome.dim(); }
  Vector scores(Target target) const;
};

/// Reads `subjects.csv` (header `id,fiq,viq`), `matrices/<id>.csv` and the
/// optional `roi_names.csv` (`index,name`). Subjects are ordered by id.
///
/// Asymmetry above 1e-8, entries outside [-1, 1], a non-unit diagonal and a
/// non-PSD spectrum are reported through warn(); the matrix is symmetrized and
/// loading continues. Missing files, ragged rows, non-finite values, duplicate
/// ids and dimension mismatches throw ValidationError with file:line context.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the layout read by load_dataset, with 17 significant digits.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Reads one comma-separated square matrix.
Matrix read_matrix_csv(const std::filesystem::path& file);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& file);

/// "%.17g" text, which round-trips every finite double exactly.
std::string format_double(double value);

}  // namespace connselect
