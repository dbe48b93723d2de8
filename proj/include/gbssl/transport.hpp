#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "gbssl/errors.hpp"
#include "gbssl/manifold.hpp"

namespace gbssl {

// Nearest-neighbor stand-in for the transport map: every query is assigned
// to its geodesically closest cloud point, so cloud points map to themselves
// exactly and rho_hat = max assigned distance estimates the cloud resolution.
struct TransportMap {
  std::vector<Eigen::Index> index;
  Eigen::VectorXd distance;  // geodesic
  double rho_hat = 0.0;
};

inline TransportMap nn_transport(const PointCloud& cloud,
                                 const Eigen::MatrixXd& queries) {
  const Eigen::Index n = cloud.size();
  if (n == 0) throw DomainError("nn_transport: empty cloud");
  const Eigen::Index q = queries.rows();
  const int d = cloud.manifold.ambient_dim;
  const bool torus = cloud.manifold.kind == ManifoldKind::FlatTorus;
  TransportMap map;
  map.index.resize(q);
  map.distance.resize(q);

  if (torus) {
    const Eigen::MatrixXd& p = cloud.points;
    for (Eigen::Index iq = 0; iq < q; ++iq) {
      double best = std::numeric_limits<double>::infinity();
      Eigen::Index arg = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
          double df = std::abs(p(i, c) - queries(iq, c));
          if (df > 0.5) df = 1.0 - df;
          s += df * df;
          if (s >= best) break;
        }
        if (s < best) {
          best = s;
          arg = i;
        }
      }
      map.index[iq] = arg;
      map.distance[iq] = std::sqrt(best);
    }
  } else {
    // chordal and geodesic nearest neighbors coincide on the sphere, so the
    // maximal inner product picks the neighbor
    const double r = cloud.manifold.sphere_radius();
    const Eigen::Index block = 2048;
    for (Eigen::Index start = 0; start < q; start += block) {
      const Eigen::Index len = std::min(block, q - start);
      Eigen::MatrixXd dots =
          queries.middleRows(start, len) * cloud.points.transpose();
      for (Eigen::Index iq = 0; iq < len; ++iq) {
        Eigen::Index arg = 0;
        const double dmax = dots.row(iq).maxCoeff(&arg);
        map.index[start + iq] = arg;
        const double c = std::clamp(dmax / (r * r), -1.0, 1.0);
        map.distance[start + iq] = r * std::acos(c);
      }
    }
  }
  map.rho_hat = q > 0 ? map.distance.maxCoeff() : 0.0;
  return map;
}

// Deterministic quasi-uniform reference grid: a centered lattice on the
// torus, a Fibonacci lattice on the sphere. Used for L-infinity estimation
// over mu and for the rho_hat resolution estimate.
inline Eigen::MatrixXd reference_grid(const ManifoldSpec& spec,
                                      Eigen::Index target_count) {
  if (target_count < 1) throw ConfigError("reference grid needs >= 1 points");
  if (spec.kind == ManifoldKind::FlatTorus) {
    const int m = spec.intrinsic_dim;
    const Eigen::Index g = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(
               std::llround(std::ceil(std::pow(double(target_count), 1.0 / m)))));
    Eigen::Index total = 1;
    for (int c = 0; c < m; ++c) total *= g;
    Eigen::MatrixXd pts(total, m);
    std::vector<Eigen::Index> idx(m, 0);
    for (Eigen::Index row = 0; row < total; ++row) {
      for (int c = 0; c < m; ++c)
        pts(row, c) = (static_cast<double>(idx[c]) + 0.5) / static_cast<double>(g);
      int c = m - 1;
      while (c >= 0 && ++idx[c] == g) idx[c--] = 0;
    }
    return pts;
  }
  const double r = spec.sphere_radius();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Eigen::MatrixXd pts(target_count, 3);
  for (Eigen::Index i = 0; i < target_count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(target_count);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    pts(i, 0) = r * rho * std::cos(phi);
    pts(i, 1) = r * rho * std::sin(phi);
    pts(i, 2) = r * z;
  }
  return pts;
}

}  // namespace gbssl
