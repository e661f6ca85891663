#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <string_view>

#include "connselect/spd_manifold.hpp"

namespace connselect {

/// Pairwise feature used by the sample-selection regressor.
enum class FeatureMethod {
  Absolute,        // a: Euclidean distance of upper triangles
  Geometric,       // g: Log-Euclidean distance
  TangentMatrix,   // tm: upper triangle of the tangent matrix
  Degree,          // dc
  Eigenvector,     // ec
  Closeness,       // cc
  ConcatUnscaled,  // cnu: dc, ec, cc
  ConcatScaled,    // cns: min-max scaled dc, ec, cc
};

inline constexpr std::array kAllFeatureMethods = {
    FeatureMethod::Absolute,      FeatureMethod::Geometric,
    FeatureMethod::TangentMatrix, FeatureMethod::Degree,
    FeatureMethod::Eigenvector,   FeatureMethod::Closeness,
    FeatureMethod::ConcatUnscaled, FeatureMethod::ConcatScaled};

std::string_view to_tag(FeatureMethod method);
/// Throws ValidationError for unknown tags.
FeatureMethod parse_feature_method(std::string_view tag);

/// Feature length for ROI count d.
Eigen::Index feature_length(FeatureMethod method, Eigen::Index d);

struct FeatureVector {
  Vector values;
  FeatureMethod method;
  Eigen::Index source_dim;
};

struct PowerIterationOptions {
  int max_iterations = 1000;
  double tolerance = 1e-10;
};

// Centralities take a symmetric, nonnegative adjacency with zero diagonal and
// throw ValidationError otherwise.

Vector degree_centrality(const Matrix& adjacency);

/// Unit-norm, nonnegative leading eigenvector. Iterates with A + I, which has
/// the same eigenvectors but keeps bipartite graphs from oscillating between
/// the +lambda and -lambda eigenvectors.
Vector eigenvector_centrality(const Matrix& adjacency, const PowerIterationOptions& options = {});

/// (r - 1) / sum of shortest-path lengths to the r - 1 other reachable nodes,
/// with edge length 1 / weight. Warns when the graph is disconnected; isolated
/// nodes get 0.
Vector closeness_centrality(const Matrix& adjacency);

/// (v_i - min) / (max - min); constant vectors map to zeros.
Vector minmax_scale(const Vector& v);

/// Row-major entries S(i, j) with i <= j (or i < j).
Vector upper_triangle(const Matrix& s, bool include_diagonal);

/// |S| with a zeroed diagonal; the graph centralities are evaluated on it.
Matrix tangent_graph(const TangentMatrix& s);

/// Feature of the pair (P_i, P_j). `s_ij` must be tangent_at_identity(P_i, P_j).
FeatureVector pair_feature(const SpdMatrix& p_i, const SpdMatrix& p_j,
                           const TangentMatrix& s_ij, FeatureMethod method);

}  // namespace connselect
