#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "gbssl/errors.hpp"
#include "gbssl/graph.hpp"
#include "gbssl/rng.hpp"

namespace gbssl {

// Smallest eigenpairs of the sparse graph Laplacian. Eigenvectors follow the
// empirical-measure convention (1/N) sum_j psi(X_j)^2 = 1, so the constant
// null vector is the all-ones vector, matching the continuum normalization.
struct EigenSystem {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // N x k, L2(mu_N)-normalized columns
  Eigen::VectorXd residuals;     // ||A psi - lambda psi||_2 / ||psi||_2
  double tol = 0.0;
  std::string normalization = "L2(mu_N)";

  Eigen::Index n_points() const { return eigenvectors.rows(); }
  int k() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

// Orthonormalize the columns of M, dropping directions with singular value
// below droptol * sigma_max. Returns the kept column count.
inline Eigen::MatrixXd svd_orth(const Eigen::MatrixXd& M,
                                double droptol = 1e-10) {
  if (M.cols() == 0) return M;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int keep = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > droptol * sv[0]) ++keep;
  return svd.matrixU().leftCols(keep);
}

inline void canonical_sign(Eigen::MatrixXd& V) {
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    Eigen::Index imax = 0;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0.0) V.col(j) = -V.col(j);
  }
}

inline EigenSystem finish_eigensystem(const Eigen::SparseMatrix<double>& A,
                                      const Eigen::VectorXd& vals,
                                      const Eigen::MatrixXd& vecs, int k,
                                      double tol) {
  const double sqn = std::sqrt(static_cast<double>(A.rows()));
  EigenSystem es;
  es.eigenvalues = vals.head(k);
  es.eigenvectors = vecs.leftCols(k);
  for (int j = 0; j < k; ++j) es.eigenvectors.col(j) *= sqn / es.eigenvectors.col(j).norm();
  canonical_sign(es.eigenvectors);
  es.residuals.resize(k);
  for (int j = 0; j < k; ++j)
    es.residuals[j] = (A * es.eigenvectors.col(j) -
                       es.eigenvalues[j] * es.eigenvectors.col(j))
                          .norm() /
                      es.eigenvectors.col(j).norm();
  es.tol = tol;
  return es;
}

}  // namespace detail

inline EigenSystem smallest_eigenpairs(const SparseLaplacian& lap, int k,
                                       double tol, std::uint64_t seed) {
  const Eigen::Index n = lap.n_points;
  if (k < 1 || k > n) throw ConfigError("eigensolver: need 1 <= k <= N");
  if (tol <= 0.0 || tol > 1e-4)
    throw ConfigError("eigensolver: tol must be in (0, 1e-4]");
  if (lap.n_components != 1)
    throw StructureError(
        "graph is disconnected (" + std::to_string(lap.n_components) +
        " components); zeta is below the connectivity threshold");
  const Eigen::SparseMatrix<double>& A = lap.matrix;

  const int guard = std::min(k, 8) + 2;
  const int nb = static_cast<int>(std::min<Eigen::Index>(k + guard, n));

  // Small problems go through the dense path; the block method needs room
  // for [X R P].
  if (3 * nb + 2 >= n) {
    Eigen::MatrixXd dense(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    return detail::finish_eigensystem(A, eig.eigenvalues(), eig.eigenvectors(),
                                      k, tol);
  }

  // LOBPCG with full-block Rayleigh-Ritz. The constant vector is seeded as
  // the first column since it spans the Laplacian null space.
  Rng rng(seed);
  Eigen::MatrixXd X(n, nb);
  X.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  for (int j = 1; j < nb; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.gaussian();
  X = detail::svd_orth(X);

  Eigen::MatrixXd P(n, 0), AP(n, 0);
  Eigen::MatrixXd AX = A * X;
  Eigen::VectorXd theta;
  const int max_iter = 600;
  bool converged = false;
  Eigen::VectorXd resnorm = Eigen::VectorXd::Constant(nb, 1.0);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Rayleigh-Ritz on the current X block
    Eigen::MatrixXd T = X.transpose() * AX;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(T);
    X = (X * rr.eigenvectors()).eval();
    AX = (AX * rr.eigenvectors()).eval();
    theta = rr.eigenvalues();

    Eigen::MatrixXd R = AX - X * theta.asDiagonal();
    converged = true;
    for (int j = 0; j < std::min(k, nb); ++j) {
      resnorm[j] = R.col(j).norm();
      if (resnorm[j] > tol * (1.0 + theta[j])) {
        converged = false;
      }
    }
    if (converged) break;

    // orthogonalize R against X, then P against [X R], keeping the block
    // structure so stored products stay valid
    R -= X * (X.transpose() * R).eval();
    {
      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          R, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      int keep = 0;
      for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-8 * std::max(sv[0], 1e-300)) ++keep;
      R = svd.matrixU().leftCols(keep);
    }
    Eigen::MatrixXd AR = A * R;

    if (P.cols() > 0) {
      Eigen::MatrixXd C = X.transpose() * P;
      P -= X * C;
      AP -= AX * C;
      C = R.transpose() * P;
      P -= R * C;
      AP -= AR * C;
      // column scaling then drop of near-dependent directions
      Eigen::BDCSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU |
                                                Eigen::ComputeThinV);
      const auto& sv = svd.singularValues();
      int keep = 0;
      for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-6 * std::max(sv[0], 1e-300)) ++keep;
      Eigen::MatrixXd G =
          svd.matrixV().leftCols(keep) *
          sv.head(keep).cwiseInverse().asDiagonal();
      P = (P * G).eval();
      AP = (AP * G).eval();
    }

    const int sc = static_cast<int>(X.cols() + R.cols() + P.cols());
    Eigen::MatrixXd S(n, sc), AS(n, sc);
    S.leftCols(X.cols()) = X;
    S.middleCols(X.cols(), R.cols()) = R;
    if (P.cols() > 0) S.rightCols(P.cols()) = P;
    AS.leftCols(X.cols()) = AX;
    AS.middleCols(X.cols(), R.cols()) = AR;
    if (P.cols() > 0) AS.rightCols(P.cols()) = AP;

    Eigen::MatrixXd T2 = S.transpose() * AS;
    T2 = 0.5 * (T2 + T2.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr2(T2);
    const Eigen::MatrixXd& V = rr2.eigenvectors();
    const int nkeep = std::min<int>(nb, sc);
    Eigen::MatrixXd Y = V.leftCols(nkeep);

    Eigen::MatrixXd Ytail = Y;
    Ytail.topRows(X.cols()).setZero();
    Eigen::MatrixXd Pnew = S * Ytail;
    Eigen::MatrixXd APnew = AS * Ytail;

    X = S * Y;
    AX = AS * Y;
    P = Pnew;
    AP = APnew;
  }

  if (!converged) {
    std::ostringstream msg;
    msg << "eigensolver did not converge within " << max_iter
        << " iterations; residuals:";
    for (int j = 0; j < std::min(k, nb); ++j) msg << ' ' << resnorm[j];
    throw SolverError(msg.str());
  }
  return detail::finish_eigensystem(A, theta, X, k, tol);
}

}  // namespace gbssl
