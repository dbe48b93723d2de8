#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "gbssl/errors.hpp"
#include "gbssl/rng.hpp"

namespace gbssl {

enum class ManifoldKind { Sphere, FlatTorus };

// Synthetic manifolds with unit volume: the flat torus [0,1)^m (ambient
// dimension m, quotient metric) and the round 2-sphere rescaled to surface
// area 1 (radius (4*pi)^{-1/2}, ambient dimension 3).
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int intrinsic_dim = 2;  // m
  int ambient_dim = 2;    // d

  static ManifoldSpec sphere(int m = 2) {
    if (m != 2)
      throw ConfigError("sphere supported only for m = 2, got m = " +
                        std::to_string(m));
    return ManifoldSpec{ManifoldKind::Sphere, m, m + 1};
  }

  static ManifoldSpec flat_torus(int m) {
    if (m < 2 || m > 5)
      throw ConfigError("flat torus supported for m in {2,...,5}, got m = " +
                        std::to_string(m));
    return ManifoldSpec{ManifoldKind::FlatTorus, m, m};
  }

  // Sphere radius for unit surface area: 4*pi*r^2 = 1.
  double sphere_radius() const {
    return 1.0 / (2.0 * std::sqrt(std::numbers::pi));
  }

  std::string name() const {
    return kind == ManifoldKind::Sphere ? "sphere" : "flat_torus";
  }

  bool operator==(const ManifoldSpec&) const = default;
};

struct PointCloud {
  Eigen::MatrixXd points;  // N x d, one point per row
  ManifoldSpec manifold;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.rows(); }
};

namespace detail {

inline void check_on_manifold(const ManifoldSpec& spec,
                              const Eigen::RowVectorXd& x, double tol = 1e-8) {
  if (x.size() != spec.ambient_dim)
    throw DimensionError("point dimension does not match manifold ambient_dim");
  if (spec.kind == ManifoldKind::Sphere) {
    const double r = spec.sphere_radius();
    if (std::abs(x.norm() - r) > tol)
      throw DomainError("point is off the sphere beyond tolerance");
  } else {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] < -tol || x[i] >= 1.0 + tol)
        throw DomainError("torus coordinate outside [0,1)");
  }
}

}  // namespace detail

// i.i.d. uniform sample; deterministic under the seed. Sphere points come
// from normalized standard Gaussians, torus points from per-coordinate
// uniforms.
inline PointCloud sample_uniform(const ManifoldSpec& spec, Eigen::Index n,
                                 std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_uniform requires N >= 1");
  Rng rng(seed);
  Eigen::MatrixXd pts(n, spec.ambient_dim);
  if (spec.kind == ManifoldKind::Sphere) {
    const double r = spec.sphere_radius();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVector3d g;
      double norm;
      do {
        g << rng.gaussian(), rng.gaussian(), rng.gaussian();
        norm = g.norm();
      } while (norm < 1e-12);
      pts.row(i) = (r / norm) * g;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < spec.ambient_dim; ++j) pts(i, j) = rng.uniform();
  }
  return PointCloud{std::move(pts), spec, seed};
}

// Metric used by the similarity graph: straight-line ambient distance on the
// sphere (chordal), quotient distance on the torus (per-coordinate wrap).
inline double euclidean_distance(const ManifoldSpec& spec,
                                 const Eigen::RowVectorXd& x,
                                 const Eigen::RowVectorXd& y) {
  if (spec.kind == ManifoldKind::Sphere) return (x - y).norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double d = std::abs(x[i] - y[i]);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

inline double geodesic_distance(const ManifoldSpec& spec,
                                const Eigen::RowVectorXd& x,
                                const Eigen::RowVectorXd& y) {
  detail::check_on_manifold(spec, x);
  detail::check_on_manifold(spec, y);
  if (spec.kind == ManifoldKind::Sphere) {
    const double r = spec.sphere_radius();
    double c = x.dot(y) / (r * r);
    c = std::clamp(c, -1.0, 1.0);
    return r * std::acos(c);
  }
  return euclidean_distance(spec, x, y);
}

}  // namespace gbssl
