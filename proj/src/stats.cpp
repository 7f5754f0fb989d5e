#include "she/stats.hpp"

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <map>
#include <mutex>

namespace she {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  std::vector<double> w(x.size(), 1.0);
  return fit_line_weighted(x, y, w);
}

LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || w.size() != n)
    throw std::invalid_argument("fit_line: need >= 2 points with matching weights");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) { sw += w[i]; sx += w[i] * x[i]; sy += w[i] * y[i]; }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += w[i] * r * r;
    ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  // residual-scaled slope error; with n==2 the fit is exact and the error 0
  const double dof = static_cast<double>(n) - 2.0;
  fit.slope_stderr = dof > 0 ? std::sqrt(ss_res / dof / sxx) : 0.0;
  return fit;
}

BinomialCi binomial_ci(std::uint64_t hits, std::uint64_t trials, double confidence) {
  if (trials == 0) throw std::invalid_argument("binomial_ci: trials == 0");
  if (hits > trials) throw std::invalid_argument("binomial_ci: hits > trials");
  const double alpha = 1.0 - confidence;
  BinomialCi ci;
  const double k = static_cast<double>(hits), n = static_cast<double>(trials);
  if (hits == 0) {
    ci.lo = 0.0;
  } else {
    boost::math::beta_distribution<double> lo(k, n - k + 1);
    ci.lo = boost::math::quantile(lo, alpha / 2);
  }
  if (hits == trials) {
    ci.hi = 1.0;
  } else {
    boost::math::beta_distribution<double> hi(k + 1, n - k);
    ci.hi = boost::math::quantile(hi, 1.0 - alpha / 2);
  }
  return ci;
}

double rule_of_three_upper(std::uint64_t trials, double confidence) {
  return -std::log(1.0 - confidence) / static_cast<double>(trials);
}

MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  double s = 0;
  for (double v : xs) s += v;
  out.mean = s / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0;
  for (double v : xs) ss += (v - out.mean) * (v - out.mean);
  out.stderr_ = std::sqrt(ss / (static_cast<double>(n) - 1.0) / static_cast<double>(n));
  return out;
}

namespace {

GaussLegendre compute_gl(int order) {
  GaussLegendre gl;
  gl.nodes.resize(order);
  gl.weights.resize(order);
  // Newton iteration on Legendre polynomials from the Chebyshev initial guess.
  for (int i = 0; i < order; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.nodes[i] = x;
    gl.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return gl;
}

}  // namespace

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gl(order)).first;
  return it->second;
}

}  // namespace she
