#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace she {

// Raised when a numeric procedure fails to converge or loses validity.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  double r2 = 0;
};

// Ordinary least squares y ~ slope*x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Weighted least squares; weights ~ 1/Var(y_i).
LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w);

struct BinomialCi {
  double lo = 0, hi = 1;
};

// Exact (Clopper-Pearson) two-sided interval at the given confidence level.
BinomialCi binomial_ci(std::uint64_t hits, std::uint64_t trials, double confidence = 0.95);

// One-sided rule-of-three style upper bound for zero hits.
double rule_of_three_upper(std::uint64_t trials, double confidence = 0.95);

struct MeanStderr {
  double mean = 0, stderr_ = 0;
};

MeanStderr mean_stderr(std::span<const double> xs);

// Gauss-Legendre nodes/weights on [-1, 1], computed once per order.
struct GaussLegendre {
  std::vector<double> nodes, weights;
};
const GaussLegendre& gauss_legendre(int order);

// Composite Gauss-Legendre integral of f over [a, b] with `panels` panels.
template <class F>
double integrate_gl(F&& f, double a, double b, int panels, int order = 16) {
  const auto& gl = gauss_legendre(order);
  const double h = (b - a) / panels;
  double total = 0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double acc = 0;
    for (std::size_t k = 0; k < gl.nodes.size(); ++k)
      acc += gl.weights[k] * f(mid + 0.5 * h * gl.nodes[k]);
    total += acc * 0.5 * h;
  }
  return total;
}

}  // namespace she
