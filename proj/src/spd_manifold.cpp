#include "connselect/spd_manifold.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "connselect/diagnostics.hpp"
#include "connselect/parallel.hpp"

namespace connselect {
namespace {

constexpr double kConnectomeSymmetryTol = 1e-12;
constexpr double kTangentSymmetryTol = 1e-10;
constexpr double kPsdTol = 1e-8;

double asymmetry(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void require_square_symmetric(const Matrix& m, double tol, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ValidationError(
        fmt::format("{}: expected a non-empty square matrix, got {}x{}", what,
                    m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw ValidationError(fmt::format("{}: non-finite entry", what));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double gap = asymmetry(m);
  if (gap > tol * scale) {
    throw ValidationError(
        fmt::format("{}: matrix is not symmetric (max |A - A^T| = {:.3g})", what, gap));
  }
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Eigen::SelfAdjointEigenSolver<Matrix> decompose(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge");
  }
  return solver;
}

template <typename Fn>
Matrix spectral_map(const Eigen::SelfAdjointEigenSolver<Matrix>& solver, Fn fn) {
  const Matrix& v = solver.eigenvectors();
  const Vector mapped = solver.eigenvalues().unaryExpr(fn);
  return symmetrized(v * mapped.asDiagonal() * v.transpose());
}

void require_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw ValidationError(fmt::format("dimension mismatch: {} vs {}", a, b));
  }
}

}  // namespace

Connectome::Connectome(Matrix entries) : entries_(std::move(entries)) {
  require_square_symmetric(entries_, kConnectomeSymmetryTol, "connectome");
}

SpdMatrix::SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
  require_square_symmetric(entries_, kConnectomeSymmetryTol, "SPD matrix");
  Eigen::LLT<Matrix> llt(entries_);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("matrix is not positive definite");
  }
}

SpdMatrix SpdMatrix::trusted(Matrix entries) {
  return SpdMatrix(std::move(entries), TrustedTag{});
}

TangentMatrix::TangentMatrix(Matrix entries) : entries_(std::move(entries)) {
  require_square_symmetric(entries_, kTangentSymmetryTol, "tangent matrix");
}

SpdMatrix regularize(const Connectome& c, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ValidationError(fmt::format("regularization mu must be positive, got {}", mu));
  }
  Matrix p = c.matrix();
  p.diagonal().array() += mu;
  return SpdMatrix(std::move(p));
}

TangentMatrix logm(const SpdMatrix& p) {
  const auto solver = decompose(p.matrix());
  const double smallest = solver.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) {
    throw NumericalError(
        fmt::format("logm: eigenvalue {:.3g} is not strictly positive", smallest));
  }
  return TangentMatrix(spectral_map(solver, [](double x) { return std::log(x); }));
}

SpdMatrix expm(const TangentMatrix& s) {
  const auto solver = decompose(s.matrix());
  return SpdMatrix::trusted(spectral_map(solver, [](double x) { return std::exp(x); }));
}

double le_distance(const SpdMatrix& p, const SpdMatrix& q) {
  require_same_dim(p.dim(), q.dim());
  return (logm(p).matrix() - logm(q).matrix()).norm();
}

TangentMatrix tangent_at_identity(const SpdMatrix& p, const SpdMatrix& q) {
  require_same_dim(p.dim(), q.dim());
  return TangentMatrix(logm(q).matrix() - logm(p).matrix());
}

SpdMatrix geodesic_point(const SpdMatrix& p, const SpdMatrix& q, double t) {
  require_same_dim(p.dim(), q.dim());
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValidationError(fmt::format("geodesic parameter t = {} outside [0, 1]", t));
  }
  if (t == 0.0) return p;
  if (t == 1.0) return q;
  const Matrix blend = (1.0 - t) * logm(p).matrix() + t * logm(q).matrix();
  return expm(TangentMatrix(blend));
}

Connectome clamp_negative(const Connectome& c, ClampMode mode) {
  if (mode == ClampMode::Entries) {
    Matrix m = c.matrix();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i != j && m(i, j) < 0.0) m(i, j) = 0.0;
      }
    }
    return Connectome(std::move(m));
  }
  const auto solver = decompose(c.matrix());
  if (solver.eigenvalues().minCoeff() >= 0.0) return c;
  return Connectome(spectral_map(solver, [](double x) { return std::max(x, 0.0); }));
}

std::vector<std::string> correlation_issues(const Connectome& c) {
  std::vector<std::string> issues;
  const Matrix& m = c.matrix();
  const Eigen::Index d = m.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(m(i, i) - 1.0) > kPsdTol) {
      issues.push_back(fmt::format("diagonal entry ({}, {}) = {} is not 1", i, i, m(i, i)));
      break;
    }
  }
  bool out_of_range = false;
  for (Eigen::Index j = 0; j < d && !out_of_range; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(m(i, j)) > 1.0 + kPsdTol) {
        issues.push_back(fmt::format(
            "entry ({}, {}) = {} outside the correlation range [-1, 1]", i, j, m(i, j)));
        out_of_range = true;
        break;
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() == Eigen::Success) {
    const double smallest = solver.eigenvalues().minCoeff();
    if (smallest < -kPsdTol) {
      issues.push_back(fmt::format(
          "smallest eigenvalue {:.3g} below -1e-8; matrix is not PSD", smallest));
    }
  }
  return issues;
}

LogCache::LogCache(std::span<const SpdMatrix> points) {
  std::vector<Matrix> logs(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    logs[i] = logm(points[i]).matrix();
  });
  if (!points.empty()) {
    for (const auto& p : points) require_same_dim(p.dim(), points.front().dim());
  }
  logs_.reserve(logs.size());
  for (auto& l : logs) logs_.emplace_back(std::move(l));
}

TangentMatrix LogCache::tangent(std::size_t from, std::size_t to) const {
  return TangentMatrix(logs_.at(to).matrix() - logs_.at(from).matrix());
}

double LogCache::distance(std::size_t i, std::size_t j) const {
  return (logs_.at(i).matrix() - logs_.at(j).matrix()).norm();
}

}  // namespace connselect
