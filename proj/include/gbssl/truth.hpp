#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

#include "gbssl/errors.hpp"
#include "gbssl/manifold.hpp"
#include "gbssl/spectrum.hpp"

namespace gbssl {

// Ground truth w0 = Phi^{-1}(f0) with analytically known regularity.
// Truths built from eigenfunction combinations keep their coefficients so
// the exact Laplacian sum(lambda_i c_i psi_i) is available.
struct TruthFunction {
  ManifoldSpec manifold;
  double beta = std::numeric_limits<double>::infinity();
  std::string tag;

  // spectral form (smooth recipes): w0 = sum c_i psi_i
  std::shared_ptr<const ContinuumSpectrum> basis;
  Eigen::VectorXd coeffs;

  // lacunary form: w0(x) = sum_j amplitudes[j] * cos(2 pi 2^j x_1)
  Eigen::VectorXd lacunary_amplitudes;

  bool has_spectral_form() const { return basis != nullptr; }

  double value(const Eigen::RowVectorXd& x) const {
    if (basis) {
      double s = 0.0;
      for (int i = 0; i < coeffs.size(); ++i)
        if (coeffs[i] != 0.0) s += coeffs[i] * basis->eval(i, x);
      return s;
    }
    double s = 0.0;
    double freq = 2.0 * std::numbers::pi;
    for (int j = 0; j < lacunary_amplitudes.size(); ++j) {
      s += lacunary_amplitudes[j] * std::cos(freq * x[0]);
      freq *= 2.0;
    }
    return s;
  }

  // analytic (-Laplace-Beltrami) w0, the continuum target of the graph
  // Laplacian applied to w0
  double laplacian_value(const Eigen::RowVectorXd& x) const {
    if (basis) {
      double s = 0.0;
      for (int i = 0; i < coeffs.size(); ++i)
        if (coeffs[i] != 0.0)
          s += basis->eigenvalue(i) * coeffs[i] * basis->eval(i, x);
      return s;
    }
    double s = 0.0;
    double freq = 2.0 * std::numbers::pi;
    for (int j = 0; j < lacunary_amplitudes.size(); ++j) {
      s += lacunary_amplitudes[j] * freq * freq * std::cos(freq * x[0]);
      freq *= 2.0;
    }
    return s;
  }

  Eigen::VectorXd values(const Eigen::MatrixXd& pts) const {
    Eigen::VectorXd out(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) out[i] = value(pts.row(i));
    return out;
  }
};

// Fixed low-frequency combination of the first 9 eigenfunctions. Declared
// regularity is infinite by convention; experiments cap it at s - m/2.
inline TruthFunction make_smooth_truth(const ManifoldSpec& spec,
                                       Eigen::VectorXd coeffs = {}) {
  if (coeffs.size() == 0) {
    coeffs = Eigen::VectorXd::Zero(9);
    coeffs << 0.6, 0.8, 0.0, 0.5, 0.0, 0.3, 0.0, 0.0, 0.2;
  }
  if (coeffs.size() > 9)
    throw ConfigError("smooth truth uses at most the first 9 eigenfunctions");
  TruthFunction t;
  t.manifold = spec;
  t.basis = analytic_spectrum(spec, static_cast<int>(coeffs.size()));
  t.coeffs = std::move(coeffs);
  t.beta = std::numeric_limits<double>::infinity();
  t.tag = "smooth_low_frequency";
  return t;
}

// Lacunary series w0(x) = sum_{j=0..J} 2^{-beta j} cos(2 pi 2^j x_1) with J
// the smallest index making the last coefficient < 1e-8. Torus only; the
// Hoelder regularity is beta by construction.
inline TruthFunction make_lacunary_truth(const ManifoldSpec& spec,
                                         double beta) {
  if (spec.kind != ManifoldKind::FlatTorus)
    throw ConfigError("lacunary truth is unsupported on the sphere");
  if (beta <= 0.0) throw ConfigError("lacunary truth requires beta > 0");
  int J = 0;
  while (std::pow(2.0, -beta * J) >= 1e-8) ++J;
  TruthFunction t;
  t.manifold = spec;
  t.lacunary_amplitudes = Eigen::VectorXd(J + 1);
  for (int j = 0; j <= J; ++j)
    t.lacunary_amplitudes[j] = std::pow(2.0, -beta * j);
  t.beta = beta;
  t.tag = "lacunary";
  return t;
}

}  // namespace gbssl
