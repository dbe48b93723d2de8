#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gbssl/eigensolver.hpp"
#include "gbssl/errors.hpp"
#include "gbssl/spectrum.hpp"

namespace gbssl {

// Alignment of the analytic spectrum onto a discrete eigensystem. Continuum
// eigenvalues are grouped into multiplets; inside each multiplet the
// evaluated continuum basis is rotated onto the discrete block by orthogonal
// Procrustes (SVD of the cross-Gram matrix). Rotations are completed to full
// orthogonal maps so the rotated basis still spans the multiplet and the
// law of fields built from it is unchanged.
struct AlignedSpectrum {
  std::shared_ptr<const ContinuumSpectrum> spectrum;

  struct Block {
    int start = 0;        // first continuum index of the multiplet
    int dim = 0;          // multiplet dimension
    int overlap = 0;      // columns matched against discrete vectors
    Eigen::MatrixXd rotation;  // dim x dim orthogonal, first `overlap`
                               // columns are the Procrustes isometry
    bool dim_mismatch = false;
  };
  std::vector<Block> blocks;

  Eigen::MatrixXd values_at_cloud;  // N x k, aligned continuum evaluations
  Eigen::VectorXd eigenvalues;      // continuum eigenvalues, first k
  int k = 0;                        // aligned mode count = min(k_disc, K)
  std::vector<std::string> warnings;
  std::size_t discrete_fingerprint = 0;

  // Aligned continuum eigenfunctions evaluated at arbitrary points; modes
  // past the last block fall back to the canonical basis.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& pts, int K) const {
    int k_ext = K;
    for (const Block& b : blocks)
      if (b.start < K) k_ext = std::max(k_ext, b.start + b.dim);
    Eigen::MatrixXd raw = spectrum->evaluate(pts, k_ext);
    for (const Block& b : blocks) {
      if (b.start >= K) break;
      raw.middleCols(b.start, b.dim) =
          (raw.middleCols(b.start, b.dim) * b.rotation).eval();
    }
    return raw.leftCols(K);
  }
};

namespace detail {

inline std::size_t eigen_fingerprint(const EigenSystem& eig) {
  std::size_t h = static_cast<std::size_t>(eig.n_points()) * 1000003u +
                  static_cast<std::size_t>(eig.k());
  for (int i = 0; i < eig.k(); ++i) {
    const auto bits = std::hash<double>{}(eig.eigenvalues[i]);
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// extend an n x p isometry to a full n x n orthogonal matrix
inline Eigen::MatrixXd complete_orthogonal(const Eigen::MatrixXd& iso) {
  const int nn = static_cast<int>(iso.rows());
  const int p = static_cast<int>(iso.cols());
  if (p == nn) return iso;
  Eigen::MatrixXd full(nn, nn);
  full.leftCols(p) = iso;
  // project identity columns and keep independent ones
  int have = p;
  for (int j = 0; j < nn && have < nn; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(nn, j);
    v -= full.leftCols(have) * (full.leftCols(have).transpose() * v).eval();
    v -= full.leftCols(have) * (full.leftCols(have).transpose() * v).eval();
    const double nv = v.norm();
    if (nv > 1e-8) full.col(have++) = v / nv;
  }
  if (have < nn)
    throw NumericalError("failed to complete multiplet rotation basis");
  return full;
}

}  // namespace detail

inline double default_cluster_tol(double lambda) {
  return 1e-6 * lambda + 1e-9;
}

inline AlignedSpectrum align_spectra(
    const EigenSystem& eig,
    std::shared_ptr<const ContinuumSpectrum> spectrum, const PointCloud& cloud,
    double cluster_tol_scale = 1e-6) {
  const Eigen::Index n = cloud.size();
  if (eig.n_points() != n)
    throw DimensionError("align_spectra: eigensystem/cloud size mismatch");
  AlignedSpectrum out;
  out.spectrum = spectrum;
  out.k = std::min(eig.k(), spectrum->size());
  out.eigenvalues.resize(out.k);
  for (int i = 0; i < out.k; ++i) out.eigenvalues[i] = spectrum->eigenvalue(i);
  out.values_at_cloud.resize(n, out.k);
  out.discrete_fingerprint = detail::eigen_fingerprint(eig);

  int start = 0;
  while (start < out.k) {
    // continuum multiplet by gap threshold
    int end = start + 1;
    while (end < spectrum->size() &&
           spectrum->eigenvalue(end) - spectrum->eigenvalue(start) <=
               cluster_tol_scale * spectrum->eigenvalue(start) + 1e-9)
      ++end;
    const int dim = end - start;
    const int overlap = std::min(dim, out.k - start);

    Eigen::MatrixXd C(n, dim);
    for (int j = 0; j < dim; ++j)
      for (Eigen::Index r = 0; r < n; ++r)
        C(r, j) = spectrum->eval(start + j, cloud.points.row(r));

    AlignedSpectrum::Block block;
    block.start = start;
    block.dim = dim;
    block.overlap = overlap;

    if (dim == 1) {
      // sign flip only
      const double ip = C.col(0).dot(eig.eigenvectors.col(start));
      block.rotation = Eigen::MatrixXd::Constant(1, 1, ip >= 0.0 ? 1.0 : -1.0);
    } else {
      const Eigen::MatrixXd D = eig.eigenvectors.middleCols(start, overlap);
      const Eigen::MatrixXd G =
          C.transpose() * D / static_cast<double>(n);  // dim x overlap
      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          G, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::MatrixXd iso =
          svd.matrixU().leftCols(overlap) * svd.matrixV().transpose();
      block.rotation = detail::complete_orthogonal(iso);
    }

    // flag multiplets whose discrete counterpart does not separate cleanly
    if (start + overlap < eig.k()) {
      double intra = 0.0;
      for (int j = start + 1; j < start + overlap; ++j)
        intra = std::max(intra,
                         eig.eigenvalues[j] - eig.eigenvalues[j - 1]);
      const double boundary =
          eig.eigenvalues[start + overlap] - eig.eigenvalues[start + overlap - 1];
      if (overlap > 1 && boundary < 2.0 * intra) {
        block.dim_mismatch = true;
        out.warnings.push_back(
            "multiplet at continuum index " + std::to_string(start + 1) +
            " does not separate cleanly in the discrete spectrum");
      }
    }
    if (overlap < dim) {
      block.dim_mismatch = true;
      out.warnings.push_back("multiplet at continuum index " +
                             std::to_string(start + 1) +
                             " truncated by the discrete eigenpair count; "
                             "comparison restricted to the overlap");
    }

    out.values_at_cloud.middleCols(start, overlap) =
        C * block.rotation.leftCols(overlap);
    out.blocks.push_back(std::move(block));
    start += overlap;
  }
  return out;
}

// Per-index diagnostics against the aligned continuum spectrum, plus the
// reference envelope lambda_i (rho/zeta + zeta sqrt(lambda_i)).
struct SpectralReport {
  struct Row {
    int index = 0;  // 1-based
    double lambda_discrete = 0.0;
    double lambda_continuum = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    double efun_l2_error = 0.0;   // L2(mu_N)
    double efun_sup_error = 0.0;  // over the cloud
    double efun_sup_norm = 0.0;   // aligned continuum mode over the cloud
    double envelope = 0.0;
  };
  std::vector<Row> rows;
  double zeta = 0.0;
  double rho_hat = 0.0;

  double mean_rel_error(int from_index, int to_index) const {
    double s = 0.0;
    int c = 0;
    for (const Row& r : rows)
      if (r.index >= from_index && r.index <= to_index) {
        s += r.rel_error;
        ++c;
      }
    if (c == 0) throw DomainError("spectral report: empty index range");
    return s / c;
  }
};

inline SpectralReport spectral_report(const AlignedSpectrum& aligned,
                                      const EigenSystem& eig, double zeta,
                                      double rho_hat) {
  if (aligned.discrete_fingerprint != detail::eigen_fingerprint(eig))
    throw AlignmentError(
        "spectral_report: eigensystem is not the one used for alignment");
  SpectralReport rep;
  rep.zeta = zeta;
  rep.rho_hat = rho_hat;
  const double nn = static_cast<double>(eig.n_points());
  for (int i = 0; i < aligned.k; ++i) {
    SpectralReport::Row row;
    row.index = i + 1;
    row.lambda_discrete = eig.eigenvalues[i];
    row.lambda_continuum = aligned.eigenvalues[i];
    row.abs_error = std::abs(row.lambda_discrete - row.lambda_continuum);
    row.rel_error = row.lambda_continuum > 0.0
                        ? row.abs_error / row.lambda_continuum
                        : row.abs_error;
    Eigen::VectorXd diff =
        eig.eigenvectors.col(i) - aligned.values_at_cloud.col(i);
    row.efun_l2_error = diff.norm() / std::sqrt(nn);
    row.efun_sup_error = diff.cwiseAbs().maxCoeff();
    row.efun_sup_norm = aligned.values_at_cloud.col(i).cwiseAbs().maxCoeff();
    row.envelope = row.lambda_continuum *
                   (rho_hat / zeta + zeta * std::sqrt(row.lambda_continuum));
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace gbssl
