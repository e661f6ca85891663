#include "connselect/linear_model.hpp"

#include <fmt/format.h>

#include <cmath>
#include <optional>

#include "connselect/diagnostics.hpp"

namespace connselect {
namespace {

// Relative pivot size below which an LDL^T factorization counts as singular.
constexpr double kSingularPivot = 1e-12;

std::optional<Eigen::LDLT<Matrix>> factor(const Matrix& gram, bool check_singular) {
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  if (check_singular) {
    const Vector pivots = ldlt.vectorD().cwiseAbs();
    const double largest = pivots.size() > 0 ? pivots.maxCoeff() : 0.0;
    if (largest == 0.0 || pivots.minCoeff() <= kSingularPivot * largest) return std::nullopt;
  }
  return ldlt;
}

// Solves the centered ridge problem; nullopt when singular at lambda = 0.
std::optional<Vector> solve_centered(const Matrix& xc, const Vector& yc, double lambda) {
  const Eigen::Index rows = xc.rows();
  const Eigen::Index cols = xc.cols();
  const bool unregularized = lambda == 0.0;
  if (cols <= rows) {
    // Centering removes one degree of freedom, so p >= n rows cannot be full rank.
    if (unregularized && cols > rows - 1) return std::nullopt;
    Matrix gram = xc.transpose() * xc;
    gram.diagonal().array() += lambda;
    auto ldlt = factor(gram, unregularized);
    if (!ldlt) return std::nullopt;
    return ldlt->solve(xc.transpose() * yc);
  }
  if (unregularized) return std::nullopt;
  Matrix kernel = xc * xc.transpose();
  kernel.diagonal().array() += lambda;
  auto ldlt = factor(kernel, false);
  if (!ldlt) return std::nullopt;
  const Vector alpha = ldlt->solve(yc);
  return Vector(xc.transpose() * alpha);
}

}  // namespace

Vector LinearModel::predict_rows(const Matrix& x) const {
  return (x * weights).array() + intercept;
}

LinearModel fit_linear(const Matrix& x, const Vector& y, double lambda) {
  if (x.rows() < 1) throw ValidationError("fit_linear: at least one row is required");
  if (x.rows() != y.size()) {
    throw ValidationError(
        fmt::format("fit_linear: {} rows but {} targets", x.rows(), y.size()));
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw ValidationError("fit_linear: non-finite design matrix or target");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ValidationError(fmt::format("fit_linear: lambda must be >= 0, got {}", lambda));
  }

  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Matrix xc = x.rowwise() - x_mean;
  const Vector yc = y.array() - y_mean;

  auto weights = solve_centered(xc, yc, lambda);
  if (!weights && lambda == 0.0) {
    warn(fmt::format(
        "fit_linear: normal equations are singular ({} rows, {} features); retrying with "
        "lambda = {:g}",
        x.rows(), x.cols(), kFallbackRidge));
    weights = solve_centered(xc, yc, kFallbackRidge);
  }
  if (!weights || !weights->allFinite()) {
    throw NumericalError("fit_linear: failed to solve the normal equations");
  }

  LinearModel model;
  model.weights = std::move(*weights);
  model.intercept = y_mean - x_mean.dot(model.weights);
  return model;
}

double r_squared(const LinearModel& model, const Matrix& x, const Vector& y) {
  const Vector residual = y - model.predict_rows(x);
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace connselect
