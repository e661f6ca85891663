#pragma once

#include "connselect/spd_manifold.hpp"

namespace connselect {

/// Affine map x -> weights . x + intercept.
struct LinearModel {
  Vector weights;
  double intercept = 0.0;

  double predict(const Eigen::Ref<const Vector>& x) const { return weights.dot(x) + intercept; }
  Vector predict_rows(const Matrix& x) const;
};

/// Ridge strength used when the unregularized system is singular.
inline constexpr double kFallbackRidge = 1e-8;

/// Minimizes |X w + b 1 - y|^2 + lambda |w|^2 with an unpenalized intercept.
///
/// The intercept is eliminated by centering; the remaining normal equations
/// are solved with a pivoted LDL^T. When there are more features than rows
/// the equivalent n x n system (X X^T + lambda I) a = y, w = X^T a is solved
/// instead. At lambda = 0 a singular system triggers a warning and a retry
/// with lambda = kFallbackRidge.
LinearModel fit_linear(const Matrix& x, const Vector& y, double lambda = 0.0);

/// Coefficient of determination of `model` on (x, y). Returns 1 for a
/// constant target that is fitted exactly.
double r_squared(const LinearModel& model, const Matrix& x, const Vector& y);

}  // namespace connselect
