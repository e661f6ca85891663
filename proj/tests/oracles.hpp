#pragma once

// Slow reference implementations used to cross-check the library. They share
// no code with src/ beyond the Matrix typedefs.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace connselect::oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector degree(const Matrix& a) {
  Vector out = Vector::Zero(a.rows());
  for (Eigen::Index v = 0; v < a.rows(); ++v)
    for (Eigen::Index w = 0; w < a.cols(); ++w)
      if (w != v) out(v) += a(v, w);
  return out;
}

/// Leading eigenvector from a full dense eigendecomposition, nonnegative and
/// unit norm.
inline Vector eigenvector(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  Vector x = es.eigenvectors().col(a.rows() - 1);
  if (x.sum() < 0) x = -x;
  return x.cwiseAbs() / x.norm();
}

/// Closeness from every simple path (depth-first enumeration), edge length
/// 1 / weight, restricted to reachable nodes.
inline Vector closeness(const Matrix& a) {
  const Eigen::Index d = a.rows();
  const double inf = std::numeric_limits<double>::infinity();
  Vector out = Vector::Zero(d);
  for (Eigen::Index s = 0; s < d; ++s) {
    std::vector<double> best(static_cast<std::size_t>(d), inf);
    std::vector<bool> on_path(static_cast<std::size_t>(d), false);
    std::function<void(Eigen::Index, double)> walk = [&](Eigen::Index u, double len) {
      best[u] = std::min(best[u], len);
      on_path[u] = true;
      for (Eigen::Index v = 0; v < d; ++v)
        if (!on_path[v] && a(u, v) > 0) walk(v, len + 1.0 / a(u, v));
      on_path[u] = false;
    };
    walk(s, 0.0);
    double total = 0;
    int reached = 0;
    for (Eigen::Index w = 0; w < d; ++w) {
      if (w == s || std::isinf(best[w])) continue;
      total += best[w];
      ++reached;
    }
    out(s) = reached > 0 ? reached / total : 0.0;
  }
  return out;
}

inline bool connected(const Matrix& a) {
  const Eigen::Index d = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(d), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Eigen::Index u = stack.back();
    stack.pop_back();
    for (Eigen::Index v = 0; v < d; ++v)
      if (!seen[v] && a(u, v) > 0) seen[v] = true, stack.push_back(v);
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

/// Every connected labelled graph with unit weights on 2..max_nodes nodes.
inline std::vector<Matrix> connected_unit_graphs(int max_nodes) {
  std::vector<Matrix> out;
  for (int n = 2; n <= max_nodes; ++n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    for (std::uint32_t mask = 1; mask < (1u << edges.size()); ++mask) {
      Matrix a = Matrix::Zero(n, n);
      for (std::size_t e = 0; e < edges.size(); ++e)
        if (mask & (1u << e)) a(edges[e].first, edges[e].second) = a(edges[e].second, edges[e].first) = 1.0;
      if (connected(a)) out.push_back(a);
    }
  }
  return out;
}

/// Random symmetric graph with weights in [0.05, 2); each edge kept with
/// probability `density`.
inline Matrix random_weighted_graph(int d, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.05, 2.0);
  std::bernoulli_distribution keep(density);
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (keep(rng)) a(i, j) = a(j, i) = weight(rng);
  return a;
}

struct SelectionOutcome {
  std::vector<std::int64_t> counts;
  std::vector<std::size_t> selected;
};

/// Sample selection with the learned regressor replaced by the true absolute
/// score difference. `folds` is the inner partition.
inline SelectionOutcome selection_with_true_differences(const std::vector<double>& scores,
                                                        const std::vector<std::vector<std::size_t>>& folds,
                                                        int k, int extract) {
  const std::size_t n = scores.size();
  SelectionOutcome out;
  out.counts.assign(n, 0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_in;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train_in.insert(train_in.end(), folds[g].begin(), folds[g].end());
    for (const std::size_t l : folds[f]) {
      std::vector<std::size_t> order = train_in;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = std::abs(scores[a] - scores[l]);
        const double db = std::abs(scores[b] - scores[l]);
        return da != db ? da < db : a < b;
      });
      const std::size_t picks = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
      for (std::size_t t = 0; t < picks; ++t) ++out.counts[order[t]];
    }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return out.counts[a] != out.counts[b] ? out.counts[a] > out.counts[b] : a < b;
  });
  idx.resize(static_cast<std::size_t>(extract));
  out.selected = idx;
  return out;
}

}  // namespace connselect::oracle
