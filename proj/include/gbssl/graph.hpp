#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "gbssl/errors.hpp"
#include "gbssl/manifold.hpp"
#include "gbssl/truth.hpp"

namespace gbssl {

// epsilon-neighborhood graph: H_ij = c * 1{|X_i - X_j| < zeta}, i != j, with
// c = 2(m+2) / (N * nu_m * zeta^{m+2}) and nu_m the unit-ball volume.
struct SimilarityGraph {
  Eigen::SparseMatrix<double> H;  // symmetric, zero diagonal
  Eigen::Index n_points = 0;
  double zeta = 0.0;
  int intrinsic_dim = 0;
  double kernel_constant = 0.0;
};

struct SparseLaplacian {
  Eigen::SparseMatrix<double> matrix;  // Delta = D - H
  Eigen::Index n_points = 0;
  double zeta = 0.0;
  int intrinsic_dim = 0;
  double kernel_constant = 0.0;
  int n_components = 0;
};

inline double unit_ball_volume(int m) {
  return std::pow(std::numbers::pi, m / 2.0) / std::tgamma(m / 2.0 + 1.0);
}

namespace detail {

// Neighbor pairs at distance < zeta (strict). Uniform-grid cell list with
// cell size >= zeta; falls back to the quadratic scan when the grid would be
// too coarse for the half-shell walk (torus wrap needs >= 3 cells per axis).
inline std::vector<std::pair<int, int>> radius_pairs(const PointCloud& cloud,
                                                     double zeta,
                                                     std::size_t max_pairs) {
  const Eigen::Index n = cloud.size();
  const int d = cloud.manifold.ambient_dim;
  const bool torus = cloud.manifold.kind == ManifoldKind::FlatTorus;
  const Eigen::MatrixXd& p = cloud.points;
  std::vector<std::pair<int, int>> pairs;

  auto sqdist = [&](Eigen::Index i, Eigen::Index j) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      double df = std::abs(p(i, c) - p(j, c));
      if (torus) df = std::min(df, 1.0 - df);
      s += df * df;
    }
    return s;
  };
  auto push = [&](Eigen::Index i, Eigen::Index j) {
    if (pairs.size() >= max_pairs)
      throw ResourceError(
          "similarity graph would exceed the sparsity budget; zeta too large");
    pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  };

  double lo = 0.0, hi = 1.0;
  if (!torus) {
    lo = p.minCoeff();
    hi = p.maxCoeff() + 1e-12;
  }
  const double extent = hi - lo;
  const int g = std::max(1, static_cast<int>(std::floor(extent / zeta)));

  if ((torus && g < 3) || (!torus && g < 2) || n < 64) {
    const double z2 = zeta * zeta;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (sqdist(i, j) < z2) push(i, j);
    return pairs;
  }

  const double cell = extent / g;
  long n_cells = 1;
  for (int c = 0; c < d; ++c) n_cells *= g;
  auto cell_of = [&](Eigen::Index i) {
    long idx = 0;
    for (int c = 0; c < d; ++c) {
      int k = static_cast<int>((p(i, c) - lo) / cell);
      k = std::clamp(k, 0, g - 1);
      idx = idx * g + k;
    }
    return idx;
  };

  // bucket sort points by cell
  std::vector<int> count(static_cast<std::size_t>(n_cells) + 1, 0);
  std::vector<long> pt_cell(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    pt_cell[i] = cell_of(i);
    ++count[pt_cell[i] + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<int> order(n);
  {
    std::vector<int> cursor(count.begin(), count.end() - 1);
    for (Eigen::Index i = 0; i < n; ++i) order[cursor[pt_cell[i]]++] = static_cast<int>(i);
  }

  // half-shell of neighbor offsets: strictly positive in lexicographic order
  std::vector<Eigen::VectorXi> shell;
  Eigen::VectorXi off = Eigen::VectorXi::Constant(d, -1);
  while (true) {
    int first = 0;
    while (first < d && off[first] == 0) ++first;
    if (first < d && off[first] > 0) shell.push_back(off);
    int c = d - 1;
    while (c >= 0 && off[c] == 1) off[c--] = -1;
    if (c < 0) break;
    ++off[c];
  }

  const double z2 = zeta * zeta;
  std::vector<int> coord(d);
  for (long ci = 0; ci < n_cells; ++ci) {
    const int a0 = count[ci], a1 = count[ci + 1];
    if (a0 == a1) continue;
    {
      long t = ci;
      for (int c = d - 1; c >= 0; --c) {
        coord[c] = static_cast<int>(t % g);
        t /= g;
      }
    }
    for (int a = a0; a < a1; ++a)
      for (int b = a + 1; b < a1; ++b)
        if (sqdist(order[a], order[b]) < z2) push(order[a], order[b]);
    for (const auto& o : shell) {
      long cj = 0;
      bool ok = true;
      for (int c = 0; c < d; ++c) {
        int k = coord[c] + o[c];
        if (torus) {
          k = (k % g + g) % g;
        } else if (k < 0 || k >= g) {
          ok = false;
          break;
        }
        cj = cj * g + k;
      }
      if (!ok) continue;
      const int b0 = count[cj], b1 = count[cj + 1];
      for (int a = a0; a < a1; ++a)
        for (int b = b0; b < b1; ++b)
          if (sqdist(order[a], order[b]) < z2) push(order[a], order[b]);
    }
  }
  return pairs;
}

}  // namespace detail

inline SimilarityGraph build_similarity(const PointCloud& cloud, double zeta,
                                        std::size_t max_nnz = (1ull << 26)) {
  if (zeta <= 0.0) throw ConfigError("connectivity zeta must be positive");
  const Eigen::Index n = cloud.size();
  const int m = cloud.manifold.intrinsic_dim;
  auto pairs = detail::radius_pairs(cloud, zeta, max_nnz / 2);

  const double c = 2.0 * (m + 2) /
                   (static_cast<double>(n) * unit_ball_volume(m) *
                    std::pow(zeta, m + 2));
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * pairs.size());
  for (auto [i, j] : pairs) {
    trip.emplace_back(i, j, c);
    trip.emplace_back(j, i, c);
  }
  SimilarityGraph graph;
  graph.H.resize(n, n);
  graph.H.setFromTriplets(trip.begin(), trip.end());
  graph.H.makeCompressed();
  graph.n_points = n;
  graph.zeta = zeta;
  graph.intrinsic_dim = m;
  graph.kernel_constant = c;
  return graph;
}

namespace detail {

inline int count_components(const Eigen::SparseMatrix<double>& H) {
  const Eigen::Index n = H.rows();
  std::vector<int> comp(n, -1);
  std::vector<Eigen::Index> stack;
  int n_comp = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    stack.push_back(s);
    comp[s] = n_comp;
    while (!stack.empty()) {
      const Eigen::Index u = stack.back();
      stack.pop_back();
      for (Eigen::SparseMatrix<double>::InnerIterator it(H, u); it; ++it)
        if (comp[it.row()] < 0) {
          comp[it.row()] = n_comp;
          stack.push_back(it.row());
        }
    }
    ++n_comp;
  }
  return n_comp;
}

}  // namespace detail

inline SparseLaplacian laplacian(const SimilarityGraph& graph) {
  const Eigen::Index n = graph.n_points;
  Eigen::VectorXd deg = graph.H * Eigen::VectorXd::Ones(n);
  Eigen::SparseMatrix<double> D(n, n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, deg[i]);
  D.setFromTriplets(trip.begin(), trip.end());
  SparseLaplacian lap;
  lap.matrix = D - graph.H;
  lap.matrix.makeCompressed();
  lap.n_points = n;
  lap.zeta = graph.zeta;
  lap.intrinsic_dim = graph.intrinsic_dim;
  lap.kernel_constant = graph.kernel_constant;
  lap.n_components = detail::count_components(graph.H);
  return lap;
}

inline double dirichlet_energy(const SparseLaplacian& lap,
                               const Eigen::VectorXd& v) {
  if (v.size() != lap.n_points)
    throw DimensionError("dirichlet_energy: vector length does not match N");
  return v.dot(lap.matrix * v);
}

struct PointwiseErrorReport {
  double sup_error = 0.0;
  double mean_error = 0.0;
};

// | (Delta_N f)(X_i) - (-Laplace-Beltrami f)(X_i) | over the cloud.
inline PointwiseErrorReport pointwise_laplacian_error(
    const SparseLaplacian& lap, const PointCloud& cloud,
    const TruthFunction& f) {
  Eigen::VectorXd fv = f.values(cloud.points);
  Eigen::VectorXd num = lap.matrix * fv;
  PointwiseErrorReport rep;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const double e = std::abs(num[i] - f.laplacian_value(cloud.points.row(i)));
    rep.sup_error = std::max(rep.sup_error, e);
    sum += e;
  }
  rep.mean_error = sum / static_cast<double>(cloud.size());
  return rep;
}

}  // namespace gbssl
