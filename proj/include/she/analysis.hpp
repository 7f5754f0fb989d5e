#pragma once

#include "she/mc.hpp"
#include "she/riesz.hpp"
#include "she/rng.hpp"
#include "she/smallball.hpp"
#include "she/stats.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace she {

// Var N(t1, x) = q_0 t1 + sum_n q_n (1 - e^{-2 pi^2 n^2 t1}) / (2 pi^2 n^2),
// with the table extended by the asymptotic coefficients and an integral tail
// so the truncation stays below 1e-8 of the total (else numeric_error).
double variance_of_N(const RieszKernel& kernel, double t1);

// The same series truncated at the kernel's mode count (no tail handling).
double variance_of_N_truncated(const RieszKernel& kernel, double t1);

// Cov(N(t1,x_k), N(t1,x_k')) as the same series with cos(n pi sep) inserted,
// sep = lag * eps^2.  lag == 0 reduces to the variance.
double covariance_of_N(const RieszKernel& kernel, double t1, long lag, double epsilon);

// Lemma 5.3 machinery: covariance matrix of N(t1, .) on the grid points,
// conditional regression coefficients eta, and the ||A||_{1,1} norm used in
// the admissibility argument.
struct CovarianceMatrixReport {
  double t1 = 0, epsilon = 0;
  Eigen::MatrixXd Sigma;   // covariance over the (deduplicated) grid
  Eigen::MatrixXd T_corr;  // correlation matrix
  double norm_11 = 0;      // ||I - T||_{1,1} (max absolute column sum)
  double eta_l1 = 0;       // max_j sum_k |eta_k^{(j)}|
  double min_eigenvalue = 0;
  bool dropped_duplicate = false;  // antipodal x = +/-1 coincide on the torus
  std::vector<Eigen::VectorXd> eta;
};

CovarianceMatrixReport eta_report(const RieszKernel& kernel, const GridSpec& grid);

// norm_11 < 1/3 is the Lemma 5.3 admissibility condition on c0.
bool grid_admissible(const RieszKernel& kernel, const GridSpec& grid);

enum class Direction { space, time };

struct RegularityReport {
  Direction direction = Direction::space;
  std::vector<double> lags, msq, msq_stderr;
  double slope = 0;
  double expected = 0;  // 2-gamma (space) or (2-gamma)/2 (time)
  bool inconclusive = false;  // MC error dominates the fit spread
};

// Mean-squared increments of N by exact spectral sampling at base time t
// (sigma == 1), fitted log-log against the lags.
RegularityReport regularity_scan(const RieszKernel& kernel, Direction dir, double base_t,
                                 std::span<const double> lags, std::uint64_t trials,
                                 const RngSpec& rng, ExecMode exec = ExecMode::openmp);

struct TailCheckReport {
  std::vector<double> lambdas, freqs;
  double msq = 0;       // series value of E[(N(t,x)-N(t,y))^2]
  double c1 = 0, c2 = 0;  // envelope c1 exp(-c2 lambda^2 / msq) covering all points
  bool c1_within_gaussian = false;  // c1 <= 2
  std::uint64_t trials = 0;
};

// Lemma 4.3: exceedance frequencies of |N(t,x) - N(t,y)| against the
// Gaussian-tail envelope.
TailCheckReport increment_tail_check(const RieszKernel& kernel, double t, double x, double y,
                                     std::span<const double> lambdas, std::uint64_t trials,
                                     const RngSpec& rng, ExecMode exec = ExecMode::openmp);

struct SupTailReport {
  double beta = 0, epsilon = 0;
  std::vector<double> lambdas, freqs;
  double lambda2_slope = 0;  // slope of log freq against lambda^2
  std::uint64_t trials = 0;
  int modes = 0;
};

// Lemma 4.4: sup of |N| over the patch [0, beta eps^4] x [0, eps^2];
// lambdas empty selects levels from the empirical sup quantiles.
SupTailReport sup_tail_check(const RieszKernel& kernel, double beta, double epsilon,
                             std::span<const double> lambdas, std::uint64_t trials,
                             const RngSpec& rng, ExecMode exec = ExecMode::openmp,
                             int modes = 512);

struct Lemma41Report {
  std::vector<double> separations, integrals;
  double slope = 0;
  double exponent = 0;  // xi or zeta
  bool slope_ok = false;  // fitted slope >= exponent
};

// Lemma 4.1 space bound: int_0^t int |G_{t-r}(x-z) - G_{t-r}(y-z)| (t-r)^{a-1} dz dr
// against |x-y|^xi.
Lemma41Report lemma41_space(double alpha, double xi, double t, double x,
                            std::span<const double> separations);

// Lemma 4.1 time bound: int_0^s int |G_{t-r}(x-z)(t-r)^{a-1} - G_{s-r}(x-z)(s-r)^{a-1}| dz dr
// against (t-s)^zeta.
Lemma41Report lemma41_time(double alpha, double zeta, double s, double x,
                           std::span<const double> time_gaps);

struct GaussCorrReport {
  double p_joint = 0, p_K = 0, p_L = 0;
  double defect = 0;       // p_joint - p_K p_L
  double se_combined = 0;  // paired delta-method standard error of the defect
  bool holds = false;      // defect >= -3 se
  std::uint64_t trials = 0;
};

// Lemma 5.4 spot-check: mu(K cap L) >= mu(K) mu(L) for symmetric boxes
// (half-width vectors) under a centered Gaussian with the given covariance.
GaussCorrReport gaussian_correlation_spotcheck(const Eigen::MatrixXd& cov,
                                               std::span<const double> half_K,
                                               std::span<const double> half_L,
                                               std::uint64_t trials, const RngSpec& rng,
                                               ExecMode exec = ExecMode::openmp);

}  // namespace she
