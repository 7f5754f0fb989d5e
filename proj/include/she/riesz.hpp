#pragma once

#include <vector>

namespace she {

// Riesz covariance Lambda(r) = |r|^{-gamma} on the torus and its cosine-series
// coefficients:  Lambda(x) = q_0 + sum_{n>=1} q_n cos(n pi x),
//   q_0 = 1/(1-gamma),  q_n = 2 * I_n,  I_n = int_0^1 x^{-gamma} cos(n pi x) dx.
// The q_n are non-negative and satisfy c n^{gamma-1} <= q_n <= c' n^{gamma-1}.
struct RieszKernel {
  double gamma = 0.5;
  int mode_count = 0;           // N
  std::vector<double> q;        // q[0..N]

  // truncated covariance Lambda_N(r)
  double lambda_truncated(double r) const;
  // q_0 + sum q_n  (variance rate of a synthesized lattice noise increment)
  double sum_q() const;
};

// |r|^{-gamma}; r == 0 raises (Lambda(0) is infinite).
double riesz_covariance(double r, double gamma);

// Build the coefficient table by singularity-splitting quadrature.
// Requires 0 < gamma < 1, N >= 1; relative tolerance 1e-10 per coefficient.
RieszKernel riesz_coefficients(double gamma, int N);

// Half-range integral I_n = int_0^1 x^{-gamma} cos(n pi x) dx, split at 1/(n pi):
// cosine series-expanded on [0, 1/(n pi)], panel Gauss-Legendre beyond.
double riesz_coefficient_halfrange(double gamma, int n);

// Three-term large-n expansion of I_n:
//   Gamma(1-g) sin(pi g/2) (n pi)^{g-1} - g (-1)^n (n pi)^{-2} + g(g+1)(g+2) (-1)^n (n pi)^{-4}
double riesz_coefficient_asymptotic(double gamma, int n);

// Fejer (Cesaro-averaged) partial sum of the cosine series at r.
double lambda_fejer(const RieszKernel& kernel, double r);

}  // namespace she
