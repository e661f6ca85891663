#include "connselect/graph_features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "connselect/diagnostics.hpp"

namespace connselect {
namespace {

void require_graph(const Matrix& a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw ValidationError(fmt::format("adjacency must be square and non-empty, got {}x{}",
                                      a.rows(), a.cols()));
  }
  if (!a.allFinite()) throw ValidationError("adjacency has a non-finite entry");
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (a(j, j) != 0.0) {
      throw ValidationError(fmt::format("adjacency diagonal ({}, {}) must be zero", j, j));
    }
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) < 0.0) {
        throw ValidationError(fmt::format("adjacency entry ({}, {}) is negative", i, j));
      }
      if (a(i, j) != a(j, i)) {
        throw ValidationError(fmt::format("adjacency is not symmetric at ({}, {})", i, j));
      }
    }
  }
}

// Dense Dijkstra from one source. Returns +inf for unreachable nodes.
Vector shortest_paths(const Matrix& a, Eigen::Index source) {
  const Eigen::Index d = a.rows();
  const double inf = std::numeric_limits<double>::infinity();
  Vector dist = Vector::Constant(d, inf);
  std::vector<bool> done(static_cast<std::size_t>(d), false);
  dist(source) = 0.0;
  for (Eigen::Index step = 0; step < d; ++step) {
    Eigen::Index u = -1;
    for (Eigen::Index v = 0; v < d; ++v) {
      if (!done[v] && (u < 0 || dist(v) < dist(u))) u = v;
    }
    if (u < 0 || dist(u) == inf) break;
    done[u] = true;
    for (Eigen::Index v = 0; v < d; ++v) {
      const double w = a(u, v);
      if (w > 0.0 && !done[v]) dist(v) = std::min(dist(v), dist(u) + 1.0 / w);
    }
  }
  return dist;
}

}  // namespace

std::string_view to_tag(FeatureMethod method) {
  switch (method) {
    case FeatureMethod::Absolute: return "a";
    case FeatureMethod::Geometric: return "g";
    case FeatureMethod::TangentMatrix: return "tm";
    case FeatureMethod::Degree: return "dc";
    case FeatureMethod::Eigenvector: return "ec";
    case FeatureMethod::Closeness: return "cc";
    case FeatureMethod::ConcatUnscaled: return "cnu";
    case FeatureMethod::ConcatScaled: return "cns";
  }
  return "?";
}

FeatureMethod parse_feature_method(std::string_view tag) {
  for (FeatureMethod m : kAllFeatureMethods) {
    if (to_tag(m) == tag) return m;
  }
  throw ValidationError(fmt::format(
      "unknown feature method '{}' (expected a, g, tm, dc, ec, cc, cnu or cns)", tag));
}

Eigen::Index feature_length(FeatureMethod method, Eigen::Index d) {
  switch (method) {
    case FeatureMethod::Absolute:
    case FeatureMethod::Geometric: return 1;
    case FeatureMethod::TangentMatrix: return d * (d + 1) / 2;
    case FeatureMethod::Degree:
    case FeatureMethod::Eigenvector:
    case FeatureMethod::Closeness: return d;
    case FeatureMethod::ConcatUnscaled:
    case FeatureMethod::ConcatScaled: return 3 * d;
  }
  return 0;
}

Vector degree_centrality(const Matrix& adjacency) {
  require_graph(adjacency);
  return adjacency.rowwise().sum();
}

Vector eigenvector_centrality(const Matrix& adjacency, const PowerIterationOptions& options) {
  require_graph(adjacency);
  if (adjacency.cwiseAbs().maxCoeff() == 0.0) {
    throw ValidationError("eigenvector centrality is undefined for an all-zero adjacency");
  }
  const Eigen::Index d = adjacency.rows();
  Vector x = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vector next = adjacency * x + x;
    next /= next.norm();
    const double change = (next - x).norm();
    x = std::move(next);
    if (change < options.tolerance) return x;
  }
  throw NumericalError(fmt::format(
      "eigenvector centrality: power iteration did not converge in {} iterations",
      options.max_iterations));
}

Vector closeness_centrality(const Matrix& adjacency) {
  require_graph(adjacency);
  const Eigen::Index d = adjacency.rows();
  Vector result = Vector::Zero(d);
  bool disconnected = false;
  for (Eigen::Index v = 0; v < d; ++v) {
    const Vector dist = shortest_paths(adjacency, v);
    double total = 0.0;
    Eigen::Index reached = 0;
    for (Eigen::Index w = 0; w < d; ++w) {
      if (w == v) continue;
      if (std::isinf(dist(w))) {
        disconnected = true;
        continue;
      }
      total += dist(w);
      ++reached;
    }
    result(v) = reached > 0 ? static_cast<double>(reached) / total : 0.0;
  }
  if (disconnected) {
    warn("closeness centrality: graph is disconnected; using reachable nodes only");
  }
  return result;
}

Vector minmax_scale(const Vector& v) {
  if (v.size() == 0) throw ValidationError("min-max scaling of an empty vector");
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (hi == lo) return Vector::Zero(v.size());
  return (v.array() - lo) / (hi - lo);
}

Vector upper_triangle(const Matrix& s, bool include_diagonal) {
  const Eigen::Index d = s.rows();
  const Eigen::Index len = include_diagonal ? d * (d + 1) / 2 : d * (d - 1) / 2;
  Vector out(len);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = include_diagonal ? i : i + 1; j < d; ++j) out(k++) = s(i, j);
  }
  return out;
}

Matrix tangent_graph(const TangentMatrix& s) {
  Matrix w = s.matrix().cwiseAbs();
  w.diagonal().setZero();
  return w;
}

FeatureVector pair_feature(const SpdMatrix& p_i, const SpdMatrix& p_j,
                           const TangentMatrix& s_ij, FeatureMethod method) {
  const Eigen::Index d = p_i.dim();
  if (p_j.dim() != d || s_ij.dim() != d) {
    throw ValidationError(fmt::format("pair feature: dimension mismatch ({}, {}, {})", d,
                                      p_j.dim(), s_ij.dim()));
  }
  FeatureVector out{Vector(), method, d};
  switch (method) {
    case FeatureMethod::Absolute:
      out.values = Vector::Constant(
          1, (upper_triangle(p_i.matrix(), true) - upper_triangle(p_j.matrix(), true)).norm());
      break;
    case FeatureMethod::Geometric:
      out.values = Vector::Constant(1, s_ij.norm());
      break;
    case FeatureMethod::TangentMatrix:
      out.values = upper_triangle(s_ij.matrix(), true);
      break;
    case FeatureMethod::Degree:
      out.values = degree_centrality(tangent_graph(s_ij));
      break;
    case FeatureMethod::Eigenvector:
      out.values = eigenvector_centrality(tangent_graph(s_ij));
      break;
    case FeatureMethod::Closeness:
      out.values = closeness_centrality(tangent_graph(s_ij));
      break;
    case FeatureMethod::ConcatUnscaled:
    case FeatureMethod::ConcatScaled: {
      const Matrix w = tangent_graph(s_ij);
      Vector dc = degree_centrality(w);
      Vector ec = eigenvector_centrality(w);
      Vector cc = closeness_centrality(w);
      if (method == FeatureMethod::ConcatScaled) {
        dc = minmax_scale(dc);
        ec = minmax_scale(ec);
        cc = minmax_scale(cc);
      }
      out.values.resize(3 * d);
      out.values << dc, ec, cc;
      break;
    }
  }
  return out;
}

}  // namespace connselect
