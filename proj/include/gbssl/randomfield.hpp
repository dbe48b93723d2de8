#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gbssl/align.hpp"
#include "gbssl/eigensolver.hpp"
#include "gbssl/errors.hpp"
#include "gbssl/rng.hpp"
#include "gbssl/transport.hpp"

namespace gbssl {

enum class RigorMode { Paper, Flat };

// Smoothness/truncation configuration of the Gauss-Markov prior.
struct PriorParams {
  double s = 4.0;
  int k = 1;
  double zeta = 0.0;
  int m = 2;
  RigorMode mode = RigorMode::Paper;
  std::string schedule_case;

  void validate() const {
    if (mode == RigorMode::Paper) {
      if (s <= 1.5 * m - 0.5)
        throw ConfigError("paper mode requires s > 3m/2 - 1/2");
    } else {
      if (s <= m) throw ConfigError("flat mode requires s > m");
    }
    if (k < 1) throw ConfigError("truncation k must be >= 1");
  }
};

inline double p_m_exponent(int m) { return m == 2 ? 0.75 : 1.0 / m; }

inline double alpha_s_exponent(int m, double s) {
  return s <= 4.5 * m + 2.5 ? (6.0 * m + 6.0) / (2.0 * s - 3.0 * m + 1.0) : 1.0;
}

// Proportionality constants of the asymptotic schedules; the theory leaves
// them free, so they are configuration inputs with default 1.
struct ScheduleConstants {
  double zeta_c = 1.0;
  double k_c = 1.0;
  double n_c = 1.0;
};

struct ScheduleResult {
  double zeta = 0.0;
  double k_real = 0.0;
  long long k = 0;
  double n_points_real = 0.0;  // N_n (may overflow to inf)
  double alpha_s = 0.0;
  double p_m = 0.0;
  double delta = 0.0;
  std::string case_tag;
  // exponents of the closed forms, for symbolic checks and reports
  double zeta_exp = 0.0, zeta_log_exp = 0.0;
  double k_exp = 0.0, k_log_exp = 0.0;
  double n_exp = 0.0, n_log_exp = 0.0;
};

namespace detail {

inline ScheduleResult schedule_exponents(int m, double s, double delta,
                                         RigorMode mode) {
  if (delta <= 0.0) throw ConfigError("schedule requires delta > 0");
  PriorParams check{s, 1, 0.0, m, mode, ""};
  check.validate();
  ScheduleResult r;
  r.delta = delta;
  r.p_m = p_m_exponent(m);
  r.alpha_s = alpha_s_exponent(m, s);
  const double denom = 2.0 * s - 3.0 * m + 1.0;
  r.k_log_exp = -m * r.p_m / ((4.0 * s - 6.0 * m + 2.0) * r.alpha_s);
  if (m <= 4) {
    r.zeta_exp = -1.0 / (m + 4.0 + delta);
    r.k_exp = m / ((m + 4.0 + delta) * denom * r.alpha_s);
    r.n_exp = (m + 4.0 + delta) * r.alpha_s;
    r.n_log_exp = (m + 4.0 + delta) * r.p_m / 2.0;
  } else {
    r.zeta_exp = -1.0 / (2.0 * m);
    r.k_exp = 1.0 / ((4.0 * s - 6.0 * m + 2.0) * r.alpha_s);
    r.n_exp = 2.0 * m * r.alpha_s;
    r.n_log_exp = m * r.p_m;
  }
  r.zeta_log_exp = r.p_m / 2.0;
  r.case_tag = std::string(m <= 4 ? "m<=4" : "m>=5") + "," +
               (r.alpha_s == 1.0 ? "s>9m/2+5/2" : "s<=9m/2+5/2");
  return r;
}

}  // namespace detail

// zeta_N and k_N for a given unlabeled sample size N.
inline ScheduleResult schedule_given_N(int m, double s, double delta, double N,
                                       RigorMode mode = RigorMode::Paper,
                                       const ScheduleConstants& c = {}) {
  ScheduleResult r = detail::schedule_exponents(m, s, delta, mode);
  if (N < 2.0) throw ConfigError("schedule needs N >= 2");
  const double logN = std::log(N);
  r.zeta = c.zeta_c * std::pow(N, r.zeta_exp) * std::pow(logN, r.zeta_log_exp);
  r.k_real = c.k_c * std::pow(N, r.k_exp) * std::pow(logN, r.k_log_exp);
  r.k = std::max<long long>(1, std::llround(r.k_real));
  r.n_points_real = N;
  return r;
}

// N_n (plus the induced zeta, k) for a given labeled sample size n.
inline ScheduleResult schedule_given_n(int m, double s, double delta, double n,
                                       RigorMode mode = RigorMode::Paper,
                                       const ScheduleConstants& c = {}) {
  ScheduleResult r = detail::schedule_exponents(m, s, delta, mode);
  if (n < 2.0) throw ConfigError("schedule needs n >= 2");
  const double logn = std::log(n);
  r.n_points_real =
      c.n_c * std::pow(n, r.n_exp) * std::pow(logn, r.n_log_exp);
  if (std::isfinite(r.n_points_real) && r.n_points_real >= 2.0) {
    const ScheduleResult sub =
        schedule_given_N(m, s, delta, r.n_points_real, mode, c);
    r.zeta = sub.zeta;
    r.k_real = sub.k_real;
    r.k = sub.k;
  }
  return r;
}

// Rate envelope of the coupled field discrepancy E_xi ||W_n - W^M||^2_Linf
// as a function of N.
inline double field_rate_envelope(int m, double s, double delta, double N) {
  const double pm = p_m_exponent(m);
  const double logN = std::log(N);
  if (s <= 4.5 * m + 2.5) {
    const double num = 2.0 * s - 3.0 * m + 1.0;
    const double log_exp = pm * num / (12.0 * m + 12.0);
    const double n_exp = m <= 4 ? num / ((m + 4.0 + delta) * (6.0 * m + 6.0))
                                : num / (m * (12.0 * m + 12.0));
    return std::pow(N, -n_exp) * std::pow(logN, log_exp);
  }
  const double n_exp = m <= 4 ? 1.0 / (m + 4.0 + delta) : 1.0 / (2.0 * m);
  return std::pow(N, -n_exp) * std::pow(logN, pm / 2.0);
}

// Reference contraction rate eps_n with unit constant:
// n^{-((s-m/2) ^ beta)/(2s)} (log n)^{((s-m/2) ^ beta)/(4s-2m)}.
inline double contraction_rate(double n, double s, int m, double beta) {
  const double a = std::min(s - 0.5 * m, beta);
  return std::pow(n, -a / (2.0 * s)) *
         std::pow(std::log(n), a / (4.0 * s - 2.0 * m));
}

// One realization of a truncated Karhunen-Loeve field along with the
// coefficients that produced it.
struct FieldSample {
  Eigen::VectorXd values;
  Eigen::VectorXd xi;
  double s = 0.0;
  int truncation = 0;
};

inline Eigen::VectorXd draw_xi(int count, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd xi(count);
  for (int i = 0; i < count; ++i) xi[i] = rng.gaussian();
  return xi;
}

// W_n = sum_{i<=k} (1 + lambda_i^{(N)})^{-s/2} xi_i psi_i^{(N)}
inline FieldSample sample_discrete_field(const EigenSystem& eig,
                                         const PriorParams& params,
                                         const Eigen::VectorXd& xi) {
  params.validate();
  if (params.k > eig.k())
    throw DimensionError("discrete field: k exceeds available eigenpairs");
  if (xi.size() < params.k)
    throw DimensionError("discrete field: xi shorter than k");
  Eigen::VectorXd coef(params.k);
  for (int i = 0; i < params.k; ++i)
    coef[i] = std::pow(1.0 + eig.eigenvalues[i], -params.s / 2.0) * xi[i];
  FieldSample f;
  f.values = eig.eigenvectors.leftCols(params.k) * coef;
  f.xi = xi.head(params.k);
  f.s = params.s;
  f.truncation = params.k;
  return f;
}

inline FieldSample sample_discrete_field(const EigenSystem& eig,
                                         const PriorParams& params,
                                         std::uint64_t seed) {
  return sample_discrete_field(eig, params, draw_xi(params.k, seed));
}

// W^M truncated at K, evaluated at query points.
inline FieldSample sample_continuum_field(const ContinuumSpectrum& spectrum,
                                          double s, int K,
                                          const Eigen::VectorXd& xi,
                                          const Eigen::MatrixXd& queries) {
  if (K > spectrum.size())
    throw ConfigError("continuum field: K beyond the spectrum table");
  if (xi.size() < K)
    throw DimensionError("continuum field: xi shorter than K");
  Eigen::VectorXd coef(K);
  for (int i = 0; i < K; ++i)
    coef[i] = std::pow(1.0 + spectrum.eigenvalue(i), -s / 2.0) * xi[i];
  FieldSample f;
  f.values = spectrum.evaluate(queries, K) * coef;
  f.xi = xi.head(K);
  f.s = s;
  f.truncation = K;
  return f;
}

inline FieldSample sample_continuum_field(const ContinuumSpectrum& spectrum,
                                          double s, int K, std::uint64_t seed,
                                          const Eigen::MatrixXd& queries) {
  return sample_continuum_field(spectrum, s, K, draw_xi(K, seed), queries);
}

// Default continuum truncation: smallest K (snapped up to a multiplet
// boundary) whose sup-norm tail proxy sum_{i>K} (1+lambda_i)^{-s/2} sup|psi_i|
// drops below tail_fraction of the leading term.
inline int default_continuum_truncation(const ContinuumSpectrum& spectrum,
                                        double s,
                                        double tail_fraction = 1e-3) {
  const int size = spectrum.size();
  std::vector<double> term(size);
  for (int i = 0; i < size; ++i) {
    const double sup =
        spectrum.manifold.kind == ManifoldKind::FlatTorus
            ? (i == 0 ? 1.0 : std::numbers::sqrt2)
            : std::sqrt(2.0 * std::floor(std::sqrt(double(i))) + 1.0);
    term[i] = std::pow(1.0 + spectrum.eigenvalue(i), -s / 2.0) * sup;
  }
  double tail = 0.0;
  std::vector<double> tails(size + 1, 0.0);
  for (int i = size - 1; i >= 0; --i) {
    tail += term[i];
    tails[i] = tail;
  }
  const double target = tail_fraction * term[0];
  int K = size;
  for (const auto& [start, len] : spectrum.multiplets()) {
    if (start > 0 && tails[start] < target) {
      K = start;
      break;
    }
  }
  return K;
}

struct CoupledDiscrepancy {
  double mean = 0.0;
  double stderror = 0.0;
  int n_mc = 0;
  std::vector<double> sup_sq;  // per-replica sup|W_n o T - W^M|^2
};

// Monte-Carlo estimate of E_xi ||W_n - W^M||^2_{L_inf(mu)} with both fields
// driven by the same xi stream; the discrete field is carried to the
// reference grid through the nearest-neighbor transport.
inline CoupledDiscrepancy coupled_discrepancy(
    const EigenSystem& eig, const AlignedSpectrum& aligned,
    const PointCloud& cloud, const PriorParams& params, int K, int n_mc,
    std::uint64_t seed, const Eigen::MatrixXd& grid) {
  params.validate();
  if (aligned.discrete_fingerprint != detail::eigen_fingerprint(eig))
    throw AlignmentError(
        "coupled_discrepancy: eigensystem was not the alignment input");
  if (params.k > eig.k())
    throw DimensionError("coupled_discrepancy: k exceeds eigensystem size");
  if (n_mc < 1) throw ConfigError("coupled_discrepancy: n_mc >= 1 required");

  const TransportMap transport = nn_transport(cloud, grid);
  const Eigen::MatrixXd cont_grid = aligned.evaluate(grid, K);
  const int n_coef = std::max(params.k, K);

  Eigen::VectorXd disc_scale(params.k), cont_scale(K);
  for (int i = 0; i < params.k; ++i)
    disc_scale[i] = std::pow(1.0 + eig.eigenvalues[i], -params.s / 2.0);
  for (int i = 0; i < K; ++i)
    cont_scale[i] = std::pow(1.0 + aligned.spectrum->eigenvalue(i),
                             -params.s / 2.0);

  CoupledDiscrepancy out;
  out.n_mc = n_mc;
  out.sup_sq.resize(n_mc);
  for (int rep = 0; rep < n_mc; ++rep) {
    const Eigen::VectorXd xi = draw_xi(n_coef, derive_seed(seed, rep));
    const Eigen::VectorXd w_disc =
        eig.eigenvectors.leftCols(params.k) *
        (disc_scale.array() * xi.head(params.k).array()).matrix();
    const Eigen::VectorXd w_cont =
        cont_grid * (cont_scale.array() * xi.head(K).array()).matrix();
    double sup = 0.0;
    for (Eigen::Index iq = 0; iq < grid.rows(); ++iq)
      sup = std::max(sup, std::abs(w_disc[transport.index[iq]] - w_cont[iq]));
    out.sup_sq[rep] = sup * sup;
  }
  // deterministic ordered reduction
  double mean = 0.0;
  for (double v : out.sup_sq) mean += v;
  mean /= n_mc;
  double var = 0.0;
  for (double v : out.sup_sq) var += (v - mean) * (v - mean);
  out.mean = mean;
  out.stderror = n_mc > 1 ? std::sqrt(var / (n_mc - 1.0) / n_mc) : 0.0;
  return out;
}

}  // namespace gbssl
