#pragma once

#include "she/mc.hpp"
#include "she/riesz.hpp"
#include "she/rng.hpp"
#include "she/solver.hpp"
#include "she/stats.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace she {

// The epsilon-grid: t_i = i c0 eps^4 with c0 = C0 eps^{(4-4g)/g}, x_j = j eps^2,
// n1 = min{ n : n eps^2 > 1 } (so x_{n1} > 1 >= x_{n1-1}).
struct GridSpec {
  double epsilon = 0;
  double gamma = 0;
  double C0 = 0;
  double c0 = 0;  // C0 * eps^{(4-4g)/g}
  double t1 = 0;  // c0 * eps^4
  int n1 = 0;
  double T = 0;
  // threshold t1^{(2-gamma)/4} used by the F-events
  double f_threshold() const;
  // threshold eps^{2-gamma} used by the E-events
  double e_threshold() const;
};

GridSpec make_grid(double epsilon, double gamma, double C0, double T);

// F_n: |u(t_n, x_j)| <= t1^{(2-g)/4} at every grid point, u sampled by nearest
// lattice node.  threshold_override > 0 replaces the default threshold
// (used for the matched-threshold containment checks).
bool event_F(const LatticePath& path, const GridSpec& grid, int n, double threshold_override = -1);

// E_n: |u(t_{n+1}, x)| <= eps^{2-g}/3 and |u(t,x)| <= eps^{2-g} on the whole
// slab [t_n, t_{n+1}] x [-1,1], sup over the lattice nodes inside the slab.
bool event_E(const LatticePath& path, const GridSpec& grid, int n);

struct SmallBallResult {
  double epsilon = 0;  // ball radius
  double T = 0;
  std::uint64_t trials = 0, hits = 0;
  double p_hat = 0, ci_lo = 0, ci_hi = 1;
  bool low_information = false;  // zero hits: ci_hi is the one-sided rule-of-three bound
  // discretization record
  double dx = 0, dt = 0;
  int modes = 0;
};

struct SmallBallConfig {
  const RieszKernel* kernel = nullptr;
  double sigma = 1.0;
  double dt = 1e-3;
  int J = 64;  // spatial cells, dx = 2/J
  ExecMode exec = ExecMode::openmp;
};

// One simulation campaign shared by all thresholds: per checkpoint time, the
// per-trial running sup of |u| over the lattice.  Trials whose running sup
// exceeds `cap` stop early (every later checkpoint then records that
// above-cap value, so any threshold <= cap still classifies correctly).
std::vector<std::vector<double>> campaign_sups(const SmallBallConfig& cfg,
                                               std::span<const double> T_checkpoints,
                                               std::uint64_t trials, const RngSpec& rng,
                                               double cap);

SmallBallResult result_from_sups(std::span<const double> sups, double eps_ball, double T,
                                 const SmallBallConfig& cfg);

SmallBallResult estimate_small_ball(double eps_ball, double T, std::uint64_t trials,
                                    const SmallBallConfig& cfg, const RngSpec& rng);

// Fixed-effort multilevel splitting over time windows (for radii where direct
// Monte Carlo starves).  Unbiased product-of-survival estimator; the reported
// interval uses the independent-window approximation.
SmallBallResult estimate_small_ball_splitting(double eps_ball, double T, int windows,
                                              std::uint64_t particles, const SmallBallConfig& cfg,
                                              const RngSpec& rng);

struct ExponentFit {
  double theta_hat = 0;
  double stderr_ = 0;
  double theta_upper = 0;  // (2g+4)/(2-g)
  double theta_lower = 0;  // (2g+4)/(g(2-g))
  bool bracket_hit = false;
};

// Weighted least squares of log(-log p_hat) against log eps across results at
// one fixed horizon; theta_hat = -slope.  Needs >= 3 usable points.
ExponentFit fit_exponent(std::span<const SmallBallResult> results, double gamma);

std::pair<double, double> theta_bracket(double gamma);

struct LinearityReport {
  double slope = 0, intercept = 0, r2 = 0;
  bool slope_positive = false;
  std::vector<double> T, neg_log_p;
};

// Fit -log p_hat against T on results at one fixed radius.
LinearityReport fit_rate_linearity(std::span<const SmallBallResult> results);

// Full operation: shared-seed nested campaign over the horizons, then the fit.
LinearityReport rate_linearity_in_T(double eps_ball, std::span<const double> Ts,
                                    std::uint64_t trials, const SmallBallConfig& cfg,
                                    const RngSpec& rng);

}  // namespace she
