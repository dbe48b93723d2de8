#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "gbssl/errors.hpp"
#include "gbssl/manifold.hpp"

namespace gbssl {

// Analytic eigenpairs of the (negative) Laplace-Beltrami operator with a
// deterministic basis inside multiplets. Torus modes are Fourier pairs
// ordered by |q|^2 then reverse-lexicographic q (axis-1 modes first, cosine
// before sine); sphere modes are real spherical harmonics ordered by
// (l, m-index). All eigenfunctions are L2(mu)-normalized for the uniform
// probability measure on the unit-volume manifold, so the first mode is the
// constant function 1.
class ContinuumSpectrum {
 public:
  struct TorusMode {
    Eigen::VectorXi q;  // canonical representative, zero for the constant
    bool is_sin = false;
  };
  struct SphereMode {
    int l = 0;
    int m = 0;  // -l..l
  };

  ManifoldSpec manifold;

  int size() const { return static_cast<int>(eigenvalues_.size()); }
  double eigenvalue(int i) const { return eigenvalues_.at(i); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  // Clusters of equal eigenvalues as (start, count), covering 0..size().
  const std::vector<std::pair<int, int>>& multiplets() const {
    return clusters_;
  }

  double eval(int i, const Eigen::RowVectorXd& x) const {
    if (manifold.kind == ManifoldKind::FlatTorus) {
      const TorusMode& mm = torus_modes_[static_cast<std::size_t>(i)];
      if (mm.q.size() == 0) return 1.0;
      double phase = 0.0;
      for (int j = 0; j < mm.q.size(); ++j) phase += mm.q[j] * x[j];
      phase *= 2.0 * std::numbers::pi;
      const double v = mm.is_sin ? std::sin(phase) : std::cos(phase);
      return std::numbers::sqrt2 * v;
    }
    return sphere_eval(sphere_modes_[static_cast<std::size_t>(i)], x);
  }

  // N x K matrix of eigenfunction values at the given points.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& pts, int K) const {
    if (K > size()) throw ConfigError("K exceeds precomputed mode table");
    Eigen::MatrixXd out(pts.rows(), K);
    for (Eigen::Index r = 0; r < pts.rows(); ++r)
      for (int i = 0; i < K; ++i) out(r, i) = eval(i, pts.row(r));
    return out;
  }

  static std::shared_ptr<const ContinuumSpectrum> build(
      const ManifoldSpec& spec, int K);

 private:
  std::vector<double> eigenvalues_;
  std::vector<TorusMode> torus_modes_;
  std::vector<SphereMode> sphere_modes_;
  std::vector<std::pair<int, int>> clusters_;

  void finalize_clusters() {
    clusters_.clear();
    int i = 0;
    const int n = size();
    while (i < n) {
      int j = i + 1;
      while (j < n && std::abs(eigenvalues_[j] - eigenvalues_[i]) <=
                          1e-9 * (1.0 + eigenvalues_[i]))
        ++j;
      clusters_.emplace_back(i, j - i);
      i = j;
    }
  }

  double sphere_eval(const SphereMode& mode, const Eigen::RowVectorXd& x) const;

  static void build_torus(ContinuumSpectrum& sp, int m, int K);
  static void build_sphere(ContinuumSpectrum& sp, int K);
};

namespace detail {

// Associated Legendre P_l^m(c) (Condon-Shortley phase), stable upward
// recurrence in l.
inline double assoc_legendre(int l, int m, double c) {
  double pmm = 1.0;
  if (m > 0) {
    const double s2 = std::max(0.0, 1.0 - c * c);
    double fact = 1.0;
    const double s = std::sqrt(s2);
    for (int i = 1; i <= m; ++i) {
      pmm *= -fact * s;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmm1 = c * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmm1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * c * pmm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmm1;
    pmm1 = pll;
  }
  return pll;
}

inline double sh_norm(int l, int m) {
  // sqrt((2l+1)/(4pi) * (l-m)!/(l+m)!) via log-gamma
  const double lg =
      std::lgamma(l - m + 1.0) - std::lgamma(l + m + 1.0);
  return std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * std::exp(lg));
}

}  // namespace detail

inline double ContinuumSpectrum::sphere_eval(const SphereMode& mode,
                                             const Eigen::RowVectorXd& x) const {
  const double r = manifold.sphere_radius();
  const Eigen::RowVector3d u = x.head<3>() / r;
  const double c = std::clamp(u[2], -1.0, 1.0);
  const double phi = std::atan2(u[1], u[0]);
  const int l = mode.l, mm = mode.m;
  const int am = std::abs(mm);
  const double p = detail::assoc_legendre(l, am, c);
  double v = detail::sh_norm(l, am) * p;
  if (mm > 0)
    v *= std::numbers::sqrt2 * std::cos(am * phi);
  else if (mm < 0)
    v *= std::numbers::sqrt2 * std::sin(am * phi);
  // rescale to L2(mu) with mu the uniform probability measure
  return v * std::sqrt(4.0 * std::numbers::pi);
}

inline void ContinuumSpectrum::build_torus(ContinuumSpectrum& sp, int m,
                                           int K) {
  // enumerate canonical representatives q (first nonzero component positive)
  // with |q| <= R, growing R until enough modes exist
  static const int r_cap[6] = {0, 0, 72, 28, 14, 9};
  struct Rep {
    long q2;
    Eigen::VectorXi q;
  };
  std::vector<Rep> reps;
  int R = 0;
  const int cap = r_cap[m];
  while (1 + 2 * static_cast<int>(reps.size()) < K && R < cap) {
    ++R;
    reps.clear();
    Eigen::VectorXi q = Eigen::VectorXi::Constant(m, -R);
    while (true) {
      long q2 = 0;
      for (int j = 0; j < m; ++j) q2 += static_cast<long>(q[j]) * q[j];
      if (q2 > 0 && q2 <= static_cast<long>(R) * R) {
        int first = 0;
        while (first < m && q[first] == 0) ++first;
        if (first < m && q[first] > 0) reps.push_back({q2, q});
      }
      int j = m - 1;
      while (j >= 0 && q[j] == R) q[j--] = -R;
      if (j < 0) break;
      ++q[j];
    }
  }
  if (1 + 2 * static_cast<int>(reps.size()) < K)
    throw ConfigError("K exceeds precomputed torus mode table");
  std::sort(reps.begin(), reps.end(), [](const Rep& a, const Rep& b) {
    if (a.q2 != b.q2) return a.q2 < b.q2;
    return std::lexicographical_compare(b.q.data(), b.q.data() + b.q.size(),
                                        a.q.data(), a.q.data() + a.q.size());
  });
  // never cut a multiplet: finish the eigenvalue shell that reaches K
  const double c0 = 4.0 * std::numbers::pi * std::numbers::pi;
  sp.eigenvalues_.push_back(0.0);
  sp.torus_modes_.push_back({Eigen::VectorXi::Zero(m), false});
  for (const Rep& rep : reps) {
    if (sp.size() >= K && c0 * rep.q2 > sp.eigenvalues_.back() + 1e-9) break;
    sp.eigenvalues_.push_back(c0 * rep.q2);
    sp.torus_modes_.push_back({rep.q, false});
    sp.eigenvalues_.push_back(c0 * rep.q2);
    sp.torus_modes_.push_back({rep.q, true});
  }
}

inline void ContinuumSpectrum::build_sphere(ContinuumSpectrum& sp, int K) {
  const int l_cap = 48;
  if (K > (l_cap + 1) * (l_cap + 1))
    throw ConfigError("K exceeds precomputed sphere mode table");
  const double r = sp.manifold.sphere_radius();
  for (int l = 0; sp.size() < K; ++l) {
    const double lam = l * (l + 1.0) / (r * r);
    for (int m = -l; m <= l; ++m) {
      sp.eigenvalues_.push_back(lam);
      sp.sphere_modes_.push_back({l, m});
    }
  }
}

inline std::shared_ptr<const ContinuumSpectrum> ContinuumSpectrum::build(
    const ManifoldSpec& spec, int K) {
  if (K < 1) throw ConfigError("analytic_spectrum requires K >= 1");
  auto sp = std::make_shared<ContinuumSpectrum>();
  sp->manifold = spec;
  if (spec.kind == ManifoldKind::FlatTorus)
    build_torus(*sp, spec.intrinsic_dim, K);
  else
    build_sphere(*sp, K);
  sp->finalize_clusters();
  return sp;
}

inline std::shared_ptr<const ContinuumSpectrum> analytic_spectrum(
    const ManifoldSpec& spec, int K) {
  return ContinuumSpectrum::build(spec, K);
}

}  // namespace gbssl
