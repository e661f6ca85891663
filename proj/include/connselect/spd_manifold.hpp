#pragma once

// Log-Euclidean geometry on the cone of symmetric positive definite matrices.
//
// Under the Log-Euclidean metric the matrix logarithm is an isometry onto the
// flat space of symmetric matrices, so distances, geodesics and parallel
// transport all reduce to linear algebra on log(P). Every routine here goes
// through a single symmetric eigendecomposition backend.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace connselect {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// d x d symmetric correlation matrix of one subject. Construction checks
/// shape, finiteness and symmetry; the correlation-range, unit-diagonal and
/// PSD properties are only reported by correlation_issues().
class Connectome {
 public:
  explicit Connectome(Matrix entries);

  const Matrix& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

 private:
  Matrix entries_;
};

/// Strictly positive definite symmetric matrix.
class SpdMatrix {
 public:
  /// Throws ValidationError on asymmetry, NumericalError if a Cholesky
  /// factorization fails.
  explicit SpdMatrix(Matrix entries);

  /// Skips the definiteness check. Used for matrices that are SPD by
  /// construction, e.g. outputs of expm.
  static SpdMatrix trusted(Matrix entries);

  const Matrix& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }

 private:
  struct TrustedTag {};
  SpdMatrix(Matrix entries, TrustedTag) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// Symmetric matrix in the tangent space at the identity.
class TangentMatrix {
 public:
  explicit TangentMatrix(Matrix entries);

  const Matrix& matrix() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }
  double norm() const { return entries_.norm(); }

 private:
  Matrix entries_;
};

enum class ClampMode { Entries, Eigenvalues };

inline constexpr double kDefaultMu = 1e-10;

/// C + mu * I.
SpdMatrix regularize(const Connectome& c, double mu = kDefaultMu);

TangentMatrix logm(const SpdMatrix& p);
SpdMatrix expm(const TangentMatrix& s);

/// Frobenius distance between matrix logarithms.
double le_distance(const SpdMatrix& p, const SpdMatrix& q);

/// log(P, Q) transported from T_P to T_I, which is logm(Q) - logm(P).
TangentMatrix tangent_at_identity(const SpdMatrix& p, const SpdMatrix& q);

/// Point at parameter t in [0, 1] on the geodesic from P to Q.
SpdMatrix geodesic_point(const SpdMatrix& p, const SpdMatrix& q, double t);

/// Entries mode zeroes negative off-diagonal entries; Eigenvalues mode zeroes
/// negative eigenvalues and reassembles the matrix.
Connectome clamp_negative(const Connectome& c, ClampMode mode = ClampMode::Entries);

/// Human-readable descriptions of correlation-matrix violations (entries
/// outside [-1, 1], non-unit diagonal, smallest eigenvalue below -1e-8).
/// Empty when the matrix is a valid correlation matrix.
std::vector<std::string> correlation_issues(const Connectome& c);

/// Matrix logarithms of a cohort, computed once. Pairwise tangents and
/// distances reuse the cached logs.
class LogCache {
 public:
  explicit LogCache(std::span<const SpdMatrix> points);

  std::size_t size() const { return logs_.size(); }
  const TangentMatrix& log(std::size_t i) const { return logs_.at(i); }

  /// tangent_at_identity(P_from, P_to).
  TangentMatrix tangent(std::size_t from, std::size_t to) const;
  double distance(std::size_t i, std::size_t j) const;

 private:
  std::vector<TangentMatrix> logs_;
};

}  // namespace connselect
