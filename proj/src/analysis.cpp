#include "she/analysis.hpp"

#include "she/heat_kernel.hpp"
#include "she/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace she {

namespace {

// one series term at mode n: weight * (1 - e^{-2 pi^2 n^2 t1}) / (2 pi^2 n^2)
inline double mode_term(double qn, long n, double t1, double cosw) {
  const double lam = 2.0 * M_PI * M_PI * static_cast<double>(n) * static_cast<double>(n);
  return qn * cosw * (1.0 - std::exp(-lam * t1)) / lam;
}

// series with optional spatial separation; extends the table with asymptotic
// coefficients in doubling blocks until the last block is negligible, then
// adds the smooth integral tail.
double n_series(const RieszKernel& kernel, double t1, double sep, bool* tail_ok) {
  const double g = kernel.gamma;
  double acc = kernel.q[0] * t1;
  for (long n = 1; n <= kernel.mode_count; ++n) {
    const double c = sep == 0.0 ? 1.0 : std::cos(n * M_PI * sep);
    acc += mode_term(kernel.q[n], n, t1, c);
  }
  // asymptotic extension in doubling blocks
  long lo = kernel.mode_count + 1;
  long hi = 2 * kernel.mode_count;
  const long n_cap = 1 << 24;
  while (lo < n_cap) {
    double block = 0;
    for (long n = lo; n <= hi; ++n) {
      const double qn = 2.0 * riesz_coefficient_asymptotic(g, static_cast<int>(n));
      const double c = sep == 0.0 ? 1.0 : std::cos(n * M_PI * sep);
      block += mode_term(qn, n, t1, c);
    }
    acc += block;
    if (std::abs(block) < 1e-10 * std::abs(acc)) break;
    lo = hi + 1;
    hi *= 2;
  }
  // integral tail of the non-oscillatory envelope beyond hi
  const double C = 2.0 * std::tgamma(1.0 - g) * std::sin(M_PI * g / 2.0) * std::pow(M_PI, g - 1.0)
                   / (2.0 * M_PI * M_PI);
  const double tail_env = C * std::pow(static_cast<double>(hi) + 0.5, g - 2.0) / (2.0 - g);
  if (sep == 0.0) acc += tail_env;  // oscillatory tails cancel; only add when coherent
  if (tail_ok) *tail_ok = tail_env <= 1e-8 * std::abs(acc) || sep != 0.0;
  return acc;
}

}  // namespace

double variance_of_N(const RieszKernel& kernel, double t1) {
  if (!(t1 > 0)) throw std::domain_error("variance_of_N: t1 must be positive");
  bool ok = true;
  const double v = n_series(kernel, t1, 0.0, &ok);
  if (!ok) throw numeric_error("variance_of_N: truncation tail exceeds 1e-8 of total");
  return v;
}

double variance_of_N_truncated(const RieszKernel& kernel, double t1) {
  if (!(t1 > 0)) throw std::domain_error("variance_of_N: t1 must be positive");
  double acc = kernel.q[0] * t1;
  for (long n = 1; n <= kernel.mode_count; ++n) acc += mode_term(kernel.q[n], n, t1, 1.0);
  return acc;
}

double covariance_of_N(const RieszKernel& kernel, double t1, long lag, double epsilon) {
  if (!(t1 > 0)) throw std::domain_error("covariance_of_N: t1 must be positive");
  const double sep = std::abs(static_cast<double>(lag)) * epsilon * epsilon;
  if (lag == 0) return variance_of_N(kernel, t1);
  return n_series(kernel, t1, sep, nullptr);
}

CovarianceMatrixReport eta_report(const RieszKernel& kernel, const GridSpec& grid) {
  CovarianceMatrixReport rep;
  rep.t1 = grid.t1;
  rep.epsilon = grid.epsilon;

  // grid indices j in [-n1+1, n1-1]; drop the duplicate torus point when
  // x_{n1-1} = 1 coincides with x_{-n1+1} = -1
  int j_lo = -grid.n1 + 1, j_hi = grid.n1 - 1;
  const double eps2 = grid.epsilon * grid.epsilon;
  if (std::abs(j_hi * eps2 - 1.0) < 1e-12) {
    j_lo += 1;
    rep.dropped_duplicate = true;
  }
  const int M = j_hi - j_lo + 1;
  if (M > 2000) throw std::domain_error("eta_report: grid too large for a dense solve");

  // covariance depends on |lag| only
  std::vector<double> cov_by_lag(M);
  const double var = variance_of_N(kernel, grid.t1);
  cov_by_lag[0] = var;
  for (int l = 1; l < M; ++l) cov_by_lag[l] = covariance_of_N(kernel, grid.t1, l, grid.epsilon);

  rep.Sigma.resize(M, M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) rep.Sigma(a, b) = cov_by_lag[std::abs(a - b)];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.Sigma, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  const double tr = rep.Sigma.trace();
  if (rep.min_eigenvalue < -1e-10 * tr)
    throw numeric_error("eta_report: covariance matrix not PSD; smallest eigenvalue " +
                        std::to_string(rep.min_eigenvalue));

  Eigen::VectorXd d = rep.Sigma.diagonal().array().sqrt();
  rep.T_corr.resize(M, M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) rep.T_corr(a, b) = rep.Sigma(a, b) / (d(a) * d(b));
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(M, M) - rep.T_corr;
  rep.norm_11 = 0;
  for (int c = 0; c < M; ++c) rep.norm_11 = std::max(rep.norm_11, A.col(c).cwiseAbs().sum());

  // conditional coefficients: for each target j, solve on the preceding block
  Eigen::MatrixXd Sr = rep.Sigma;
  if (rep.min_eigenvalue < 1e-12 * tr)
    Sr += 1e-12 * tr * Eigen::MatrixXd::Identity(M, M);  // ridge against truncation erosion
  rep.eta_l1 = 0;
  for (int j = 1; j < M; ++j) {
    Eigen::VectorXd eta = Sr.topLeftCorner(j, j).ldlt().solve(Sr.col(j).head(j));
    rep.eta_l1 = std::max(rep.eta_l1, eta.cwiseAbs().sum());
    rep.eta.push_back(std::move(eta));
  }
  return rep;
}

bool grid_admissible(const RieszKernel& kernel, const GridSpec& grid) {
  return eta_report(kernel, grid).norm_11 < 1.0 / 3.0;
}

RegularityReport regularity_scan(const RieszKernel& kernel, Direction dir, double base_t,
                                 std::span<const double> lags, std::uint64_t trials,
                                 const RngSpec& rng, ExecMode exec) {
  if (lags.size() < 2) throw std::invalid_argument("regularity_scan: need >= 2 lags");
  if (*std::min_element(lags.begin(), lags.end()) <= 0)
    throw std::domain_error("regularity_scan: lags must be positive");
  std::vector<double> sorted(lags.begin(), lags.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t L = sorted.size();

  std::vector<double> sq(L * trials, 0.0);
  if (dir == Direction::space) {
    const double x0 = -0.3;  // arbitrary base point; the field is stationary
    std::vector<double> xs(L + 1);
    xs[0] = x0;
    for (std::size_t i = 0; i < L; ++i) xs[i + 1] = x0 + sorted[i];
    for_each_trial(trials, exec, [&](std::size_t trial) {
      SpectralState st = make_zero_state(kernel);
      ou_step(st, base_t, RngSpec{rng.seed, rng.stream + trial});
      const auto vals = evaluate_field(st, xs);
      for (std::size_t i = 0; i < L; ++i) {
        const double d = vals[i + 1] - vals[0];
        sq[i * trials + trial] = d * d;
      }
    });
  } else {
    const double x0 = -0.3;
    const double xs[1] = {x0};
    for_each_trial(trials, exec, [&](std::size_t trial) {
      RngSpec trng{rng.seed, rng.stream + trial};
      SpectralState st = make_zero_state(kernel);
      ou_step(st, base_t, trng);
      const double u0 = evaluate_field(st, xs)[0];
      double prev = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        ou_step(st, sorted[i] - prev, trng);
        prev = sorted[i];
        const double d = evaluate_field(st, xs)[0] - u0;
        sq[i * trials + trial] = d * d;
      }
    });
  }

  RegularityReport rep;
  rep.direction = dir;
  rep.lags = sorted;
  rep.expected = dir == Direction::space ? 2.0 - kernel.gamma : (2.0 - kernel.gamma) / 2.0;
  std::vector<double> logl, logm;
  for (std::size_t i = 0; i < L; ++i) {
    const auto ms = mean_stderr(std::span<const double>(&sq[i * trials], trials));
    rep.msq.push_back(ms.mean);
    rep.msq_stderr.push_back(ms.stderr_);
    logl.push_back(std::log(sorted[i]));
    logm.push_back(std::log(ms.mean));
  }
  const LineFit fit = fit_line(logl, logm);
  rep.slope = fit.slope;
  // MC noise vs spread of the fitted line across the lag range
  const double spread = std::abs(fit.slope) * (logl.back() - logl.front());
  double max_rel = 0;
  for (std::size_t i = 0; i < L; ++i) max_rel = std::max(max_rel, rep.msq_stderr[i] / rep.msq[i]);
  rep.inconclusive = max_rel > 0.2 * spread;
  return rep;
}

TailCheckReport increment_tail_check(const RieszKernel& kernel, double t, double x, double y,
                                     std::span<const double> lambdas, std::uint64_t trials,
                                     const RngSpec& rng, ExecMode exec) {
  TailCheckReport rep;
  rep.lambdas.assign(lambdas.begin(), lambdas.end());
  rep.trials = trials;

  // series msq of the spatial increment (q_0 cancels)
  const double sep = x - y;
  double msq = 0;
  for (long n = 1; n <= kernel.mode_count; ++n)
    msq += 2.0 * mode_term(kernel.q[n], n, t, 1.0 - std::cos(n * M_PI * sep));
  rep.msq = msq;

  std::vector<double> diffs(trials);
  const double xs[2] = {x, y};
  for_each_trial(trials, exec, [&](std::size_t trial) {
    SpectralState st = make_zero_state(kernel);
    ou_step(st, t, RngSpec{rng.seed, rng.stream + trial});
    const auto v = evaluate_field(st, xs);
    diffs[trial] = std::abs(v[0] - v[1]);
  });

  std::vector<double> l2, logf;
  for (double lam : rep.lambdas) {
    std::uint64_t k = 0;
    for (double d : diffs)
      if (d > lam) ++k;
    const double f = static_cast<double>(k) / static_cast<double>(trials);
    rep.freqs.push_back(f);
    if (k >= 10 && f < 1.0) {
      l2.push_back(lam * lam / msq);
      logf.push_back(std::log(f));
    }
  }
  if (l2.size() >= 2) {
    const LineFit fit = fit_line(l2, logf);
    rep.c2 = -fit.slope;
    // smallest prefactor whose envelope covers every nonzero point
    double c1 = 0;
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
      if (rep.freqs[i] <= 0) continue;
      c1 = std::max(c1, rep.freqs[i] * std::exp(rep.c2 * rep.lambdas[i] * rep.lambdas[i] / msq));
    }
    rep.c1 = c1;
    rep.c1_within_gaussian = c1 <= 2.0;
  }
  return rep;
}

SupTailReport sup_tail_check(const RieszKernel& kernel, double beta, double epsilon,
                             std::span<const double> lambdas, std::uint64_t trials,
                             const RngSpec& rng, ExecMode exec, int modes) {
  if (!(beta > 0) || !(epsilon > 0) || beta * std::pow(epsilon, 4.0) > 1.0)
    throw std::domain_error("sup_tail_check: need beta, eps > 0 and beta eps^4 <= 1");
  modes = std::min(modes, kernel.mode_count);
  const double Tp = beta * std::pow(epsilon, 4.0);
  const int nt = 96, nx = 25;
  const double dt = Tp / nt;
  std::vector<double> xs(nx);
  for (int j = 0; j < nx; ++j) xs[j] = epsilon * epsilon * j / (nx - 1.0);

  // restrict the kernel to the requested modes for the patch evolution
  RieszKernel sub;
  sub.gamma = kernel.gamma;
  sub.mode_count = modes;
  sub.q.assign(kernel.q.begin(), kernel.q.begin() + modes + 1);
  const TrigTable table = make_trig_table(modes, xs);
  const OuPropagator prop(sub, dt);

  std::vector<double> sups(trials);
  for_each_trial(trials, exec, [&](std::size_t trial) {
    RngSpec trng{rng.seed, rng.stream + trial};
    SpectralState st = make_zero_state(sub);
    std::vector<double> field(xs.size());
    double sup = 0;
    for (int m = 0; m < nt; ++m) {
      prop.step(st, trng);
      evaluate_field(st, table, field);
      for (double v : field) sup = std::max(sup, std::abs(v));
    }
    sups[trial] = sup;
  });

  SupTailReport rep;
  rep.beta = beta;
  rep.epsilon = epsilon;
  rep.trials = trials;
  rep.modes = modes;
  const double scale = std::pow(epsilon, 2.0 - kernel.gamma);
  if (lambdas.empty()) {
    // levels from the empirical quantiles: exceedance window ~ [0.005, 0.3]
    std::vector<double> sorted(sups);
    std::sort(sorted.begin(), sorted.end());
    const double qlo = sorted[static_cast<std::size_t>(0.70 * (trials - 1))] / scale;
    const double qhi = sorted[static_cast<std::size_t>(0.995 * (trials - 1))] / scale;
    for (int i = 0; i < 6; ++i) rep.lambdas.push_back(qlo + (qhi - qlo) * i / 5.0);
  } else {
    rep.lambdas.assign(lambdas.begin(), lambdas.end());
  }
  std::vector<double> l2, logf;
  for (double lam : rep.lambdas) {
    std::uint64_t k = 0;
    for (double s : sups)
      if (s > lam * scale) ++k;
    const double f = static_cast<double>(k) / static_cast<double>(trials);
    rep.freqs.push_back(f);
    if (k >= 5 && f < 1.0) {
      l2.push_back(lam * lam);
      logf.push_back(std::log(f));
    }
  }
  if (l2.size() < 2) throw numeric_error("sup_tail_check: too few populated levels");
  rep.lambda2_slope = fit_line(l2, logf).slope;
  return rep;
}

namespace {

// int_{-1}^{1} |G_tau(x-z) - G_tau(y-z)| dz, split at the kink points
double g_l1_diff(double tau, double x, double y) {
  const double mid = 0.5 * (x + y);
  // kinks at the midpoint and its antipode on the torus
  double cuts[4] = {-1.0, std::remainder(mid, 2.0), std::remainder(mid + 1.0, 2.0), 1.0};
  std::sort(cuts, cuts + 4);
  const auto f = [&](double z) {
    return std::abs(heat_kernel(tau, x - z) - heat_kernel(tau, y - z));
  };
  double acc = 0;
  for (int p = 0; p < 3; ++p)
    if (cuts[p + 1] > cuts[p]) acc += integrate_gl(f, cuts[p], cuts[p + 1], 6, 16);
  return acc;
}

}  // namespace

Lemma41Report lemma41_space(double alpha, double xi, double t, double x,
                            std::span<const double> separations) {
  if (alpha <= 0 || alpha >= 1) throw std::domain_error("lemma41: alpha must lie in (0,1)");
  if (xi <= 0 || xi >= 2 * alpha) throw std::domain_error("lemma41: xi must lie in (0, 2 alpha)");
  Lemma41Report rep;
  rep.exponent = xi;
  std::vector<double> logs, logi;
  for (double sep : separations) {
    const double y = x + sep;
    // w = (t - r)^alpha
    const auto f = [&](double w) { return g_l1_diff(std::pow(w, 1.0 / alpha), x, y); };
    const double I = integrate_gl(f, 0.0, std::pow(t, alpha), 48, 16) / alpha;
    rep.separations.push_back(sep);
    rep.integrals.push_back(I);
    logs.push_back(std::log(sep));
    logi.push_back(std::log(I));
  }
  rep.slope = fit_line(logs, logi).slope;
  rep.slope_ok = rep.slope >= xi - 1e-9;
  return rep;
}

Lemma41Report lemma41_time(double alpha, double zeta, double s, double x,
                           std::span<const double> time_gaps) {
  if (alpha <= 0 || alpha >= 1) throw std::domain_error("lemma41: alpha must lie in (0,1)");
  if (zeta <= 0 || zeta >= alpha) throw std::domain_error("lemma41: zeta must lie in (0, alpha)");
  Lemma41Report rep;
  rep.exponent = zeta;
  std::vector<double> logs, logi;
  for (double gap : time_gaps) {
    const double t = s + gap;
    const auto inner = [&](double r) {
      const double ws = std::pow(s - r, alpha - 1.0), wt = std::pow(t - r, alpha - 1.0);
      const auto f = [&](double z) {
        return std::abs(heat_kernel(t - r, x - z) * wt - heat_kernel(s - r, x - z) * ws);
      };
      // resolve the kernel spike near z = x when the width is small
      const double width = 8.0 * std::sqrt(t - r);
      if (width < 0.5) {
        const double zl = x - width, zr = x + width;
        return integrate_gl(f, zl, zr, 10, 16) + integrate_gl(f, zr, zl + 2.0, 10, 16);
      }
      return integrate_gl(f, -1.0, 1.0, 12, 16);
    };
    // w = (s - r)^alpha flattens the r -> s endpoint
    const auto outer = [&](double w) {
      const double smr = std::pow(w, 1.0 / alpha);
      return inner(s - smr) * smr / w;  // dr = (1/alpha) smr / w * dw, alpha folded below
    };
    const double I = integrate_gl(outer, 1e-12, std::pow(s, alpha), 64, 16) / alpha;
    rep.separations.push_back(gap);
    rep.integrals.push_back(I);
    logs.push_back(std::log(gap));
    logi.push_back(std::log(I));
  }
  rep.slope = fit_line(logs, logi).slope;
  rep.slope_ok = rep.slope >= zeta - 1e-9;
  return rep;
}

GaussCorrReport gaussian_correlation_spotcheck(const Eigen::MatrixXd& cov,
                                               std::span<const double> half_K,
                                               std::span<const double> half_L,
                                               std::uint64_t trials, const RngSpec& rng,
                                               ExecMode exec) {
  const int d = static_cast<int>(cov.rows());
  if (cov.cols() != d || static_cast<int>(half_K.size()) != d ||
      static_cast<int>(half_L.size()) != d)
    throw std::invalid_argument("gaussian_correlation_spotcheck: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(cov + 1e-14 * cov.trace() * Eigen::MatrixXd::Identity(d, d));
  if (llt.info() != Eigen::Success)
    throw numeric_error("gaussian_correlation_spotcheck: covariance not positive definite");
  const Eigen::MatrixXd Lchol = llt.matrixL();

  std::vector<std::uint8_t> inK(trials), inL(trials);
  for_each_trial(trials, exec, [&](std::size_t trial) {
    SequentialRng sr(RngSpec{rng.seed, rng.stream + trial});
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z(i) = sr.normal();
    const Eigen::VectorXd v = Lchol * z;
    bool k = true, l = true;
    for (int i = 0; i < d; ++i) {
      if (std::abs(v(i)) > half_K[i]) k = false;
      if (std::abs(v(i)) > half_L[i]) l = false;
    }
    inK[trial] = k;
    inL[trial] = l;
  });

  GaussCorrReport rep;
  rep.trials = trials;
  double sK = 0, sL = 0, sJ = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    sK += inK[i];
    sL += inL[i];
    sJ += inK[i] & inL[i];
  }
  const double n = static_cast<double>(trials);
  rep.p_K = sK / n;
  rep.p_L = sL / n;
  rep.p_joint = sJ / n;
  rep.defect = rep.p_joint - rep.p_K * rep.p_L;
  // paired influence function of the defect
  double var = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const double di = (inK[i] & inL[i]) - rep.p_L * inK[i] - rep.p_K * inL[i] + rep.p_K * rep.p_L;
    const double centered = di - rep.defect;
    var += centered * centered;
  }
  rep.se_combined = std::sqrt(var / (n - 1.0) / n);
  rep.holds = rep.defect >= -3.0 * rep.se_combined;
  return rep;
}

}  // namespace she
