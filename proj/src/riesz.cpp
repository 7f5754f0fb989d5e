#include "she/riesz.hpp"

#include "she/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace she {

double RieszKernel::lambda_truncated(double r) const {
  double acc = q[0];
  for (int n = 1; n <= mode_count; ++n) acc += q[n] * std::cos(n * M_PI * r);
  return acc;
}

double RieszKernel::sum_q() const {
  double acc = 0;
  for (double v : q) acc += v;
  return acc;
}

double riesz_covariance(double r, double gamma) {
  if (gamma <= 0 || gamma >= 1)
    throw std::domain_error("riesz_covariance: gamma must lie in (0,1)");
  if (r == 0)
    throw std::domain_error("riesz_covariance: Lambda(0) is infinite");
  return std::pow(std::abs(r), -gamma);
}

namespace {

// series part: int_0^{1/(n pi)} x^{-g} cos(n pi x) dx = (n pi)^{g-1} * sum_k (-1)^k / ((2k)! (2k+1-g))
double series_part(double g, int n) {
  double sum = 0, inv_fact = 1.0;
  for (int k = 0; k < 30; ++k) {
    const double term = (k % 2 ? -1.0 : 1.0) * inv_fact / (2.0 * k + 1.0 - g);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    inv_fact /= (2.0 * k + 1.0) * (2.0 * k + 2.0);
  }
  return std::pow(n * M_PI, g - 1.0) * sum;
}

// oscillatory part on [1/(n pi), 1] with half-period panels
double oscillatory_part(double g, int n, int order) {
  const double xs = 1.0 / (n * M_PI);
  const auto f = [&](double x) { return std::pow(x, -g) * std::cos(n * M_PI * x); };
  const auto& gl = gauss_legendre(order);
  double total = 0;
  const double h = 1.0 / n;  // half period of cos(n pi x)
  double left = xs;
  for (int m = 1; m <= n; ++m) {
    const double right = m < n ? m * h : 1.0;
    const double mid = 0.5 * (left + right), half = 0.5 * (right - left);
    double acc = 0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k)
      acc += gl.weights[k] * f(mid + half * gl.nodes[k]);
    total += acc * half;
    left = right;
  }
  return total;
}

}  // namespace

double riesz_coefficient_halfrange(double gamma, int n) {
  if (n == 0) return 1.0 / (1.0 - gamma);
  return series_part(gamma, n) + oscillatory_part(gamma, n, 12);
}

double riesz_coefficient_asymptotic(double gamma, int n) {
  const double a = n * M_PI;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return std::tgamma(1.0 - gamma) * std::sin(M_PI * gamma / 2.0) * std::pow(a, gamma - 1.0)
         - sign * gamma / (a * a)
         + sign * gamma * (gamma + 1.0) * (gamma + 2.0) / (a * a * a * a);
}

RieszKernel riesz_coefficients(double gamma, int N) {
  if (gamma <= 0 || gamma >= 1)
    throw std::domain_error("riesz_coefficients: gamma must lie in (0,1)");
  if (N < 1) throw std::domain_error("riesz_coefficients: N must be >= 1");

  RieszKernel kernel;
  kernel.gamma = gamma;
  kernel.mode_count = N;
  kernel.q.assign(N + 1, 0.0);
  kernel.q[0] = 1.0 / (1.0 - gamma);

  bool converged = true;
#pragma omp parallel for schedule(dynamic, 32) reduction(&& : converged)
  for (int n = 1; n <= N; ++n) {
    const double sp = series_part(gamma, n);
    const double coarse = sp + oscillatory_part(gamma, n, 8);
    const double fine = sp + oscillatory_part(gamma, n, 12);
    if (std::abs(fine - coarse) > 1e-10 * std::max(std::abs(fine), 1e-3))
      converged = false;
    double qn = 2.0 * fine;
    if (qn < -1e-12) converged = false;
    kernel.q[n] = qn < 0 ? 0.0 : qn;  // clamp quadrature round-off
  }
  if (!converged)
    throw numeric_error("riesz_coefficients: quadrature tolerance 1e-10 not met for gamma=" +
                        std::to_string(gamma));
  return kernel;
}

double lambda_fejer(const RieszKernel& kernel, double r) {
  const int N = kernel.mode_count;
  double acc = kernel.q[0];
  for (int n = 1; n <= N; ++n)
    acc += kernel.q[n] * (1.0 - static_cast<double>(n) / (N + 1.0)) * std::cos(n * M_PI * r);
  return acc;
}

}  // namespace she
