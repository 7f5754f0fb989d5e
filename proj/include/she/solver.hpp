#pragma once

#include "she/riesz.hpp"
#include "she/rng.hpp"
#include "she/spectral.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace she {

// Noise coefficient sigma(t,x,u): Lipschitz in u with constant `lip`,
// uniformly bounded by [c1, c2]; bounds are checked at every evaluation.
struct SigmaSpec {
  std::function<double(double, double, double)> fn;  // empty => constant
  double value = 1.0;
  double c1 = 1.0, c2 = 1.0;
  double lip = 0.0;

  static SigmaSpec constant(double c);
  static SigmaSpec bounded(std::function<double(double, double, double)> f, double c1, double c2,
                           double lip);
  bool is_constant() const { return !fn; }
  double operator()(double t, double x, double u) const;
};

// Solution values on a uniform space-time lattice, periodic in space
// (column J duplicates column 0).
struct LatticePath {
  double dx = 0, dt = 0;
  std::size_t steps = 0;   // time levels = steps + 1
  std::size_t points = 0;  // columns = J + 1
  std::vector<double> values;
  struct Meta {
    double gamma = 0;
    int modes = 0;
    std::uint64_t seed = 0, stream = 0;
  } meta;

  double at(std::size_t m, std::size_t j) const { return values[m * points + j]; }
  double time_at(std::size_t m) const { return static_cast<double>(m) * dt; }
  double x_at(std::size_t j) const { return -1.0 + static_cast<double>(j) * dx; }
  double sup_abs() const;
};

// Deterministic initial data as spectral coefficients:
// u0(x) = a[0] + sum a[n] cos(n pi x) + b[n] sin(n pi x).
struct SpectralProfile {
  std::vector<double> a, b;
};

// Exact sampler for constant sigma: u(t,x) = decayed u0 + sigma * N(t,x),
// with N from the per-mode OU recursion (no time-discretization bias in the
// one-time law).  J is the number of spatial cells (dx = 2/J).
LatticePath solve_constant_sigma(const RieszKernel& kernel, double sigma, double T, double dt,
                                 int J, const RngSpec& rng, const SpectralProfile* u0 = nullptr);

// Streaming version: visit(m, t, field values on the J+1 periodic lattice)
// after every step (m = 0 is the initial state).  Returns nothing; the
// visitor may stop early by returning false.
void stream_constant_sigma(const RieszKernel& kernel, double sigma, double T, double dt, int J,
                           const RngSpec& rng,
                           const std::function<bool(std::size_t, double, std::span<const double>)>& visit,
                           const SpectralProfile* u0 = nullptr);

// Explicit finite-difference Euler-Maruyama scheme with periodic boundary:
//   u[m+1][j] = u[m][j] + (dt/dx^2)(u[m][j+1] - 2u[m][j] + u[m][j-1]) + sigma(...) dF_j.
// Stability requires dt <= dx^2/4.  noise_modes = 0 selects the lattice
// Nyquist count 1/dx (modes above it alias on the lattice and bias the
// solution law, see README).
LatticePath solve_general(const RieszKernel& kernel, const SigmaSpec& sigma,
                          std::span<const double> u0, double T, double dt, double dx,
                          const RngSpec& rng, int noise_modes = 0);

// Factorization identity for one Fourier mode: both sides of
//   int_0^T e^{-pi^2 n^2 (T-s)} dB(s)
//     = sin(pi a)/pi * int_0^T (T-r)^{a-1} e^{-pi^2 n^2 (T-r)} Y_{a,n}(r) dr,
//   Y_{a,n}(r) = int_0^r (r-s)^{-a} e^{-pi^2 n^2 (r-s)} dB(s),
// evaluated from the same Brownian increments.
struct FactorizationReport {
  double alpha = 0;
  int mode = 0;
  double lhs = 0, rhs = 0, rel_err = 0;
  double dt = 0;
};

// alpha must lie in (0, (2-gamma)/4).
FactorizationReport factorization_check(double alpha, double gamma, int mode, double T,
                                        double dt_fine, const RngSpec& rng);

// Same computation on externally supplied increments (for nested-refinement
// studies on one Brownian path).
FactorizationReport factorization_check_on_path(double alpha, int mode, double T,
                                                std::span<const double> dB);

// E[Y_alpha^2(r, z)] = C2^2 * sum_n q_n int_0^r (r-s)^{-2a} e^{-2 pi^2 n^2 (r-s)} ds,
// by substitution quadrature (w = u^{1-2a} flattens the endpoint).
struct YAlphaMoment {
  double value = 0;       // the series
  double bound = 0;       // C * [q_0 + sum q_n n^{4a-2} Gamma(1-2a)] bracket (C fitted)
  double fitted_C = 0;    // value / (C2^2 * bracket)
  bool tail_ok = true;    // truncation estimate within tolerance
};
YAlphaMoment y_alpha_second_moment(double alpha, const RieszKernel& kernel, double r,
                                   double c2 = 1.0);

}  // namespace she
