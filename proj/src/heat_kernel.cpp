#include "she/heat_kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace she {

namespace {

double image_sum(double t, double x) {
  const double norm = 1.0 / std::sqrt(4.0 * M_PI * t);
  double acc = 0;
  for (int n = -kImageTerms; n <= kImageTerms; ++n) {
    const double d = x + 2.0 * n;
    acc += std::exp(-d * d / (4.0 * t));
  }
  return norm * acc;
}

double spectral_sum(double t, double x) {
  double acc = 0.5;
  for (int n = 1;; ++n) {
    const double factor = std::exp(-M_PI * M_PI * n * n * t);
    if (factor < kSpectralCutoff) break;
    acc += factor * std::cos(n * M_PI * x);
  }
  return acc;
}

}  // namespace

double heat_kernel(const HeatKernelQuery& q) {
  if (!std::isfinite(q.t) || !std::isfinite(q.x))
    throw std::domain_error("heat_kernel: non-finite input");
  if (q.t <= 0)
    throw std::domain_error("heat_kernel: t must be positive, got " + std::to_string(q.t));
  const double x = std::remainder(q.x, 2.0);  // reduce mod 2 into [-1, 1]
  switch (q.form) {
    case HeatKernelForm::image_sum: return image_sum(q.t, x);
    case HeatKernelForm::spectral: return spectral_sum(q.t, x);
    case HeatKernelForm::auto_select:
      return q.t < kHeatKernelCrossover ? image_sum(q.t, x) : spectral_sum(q.t, x);
  }
  throw std::domain_error("heat_kernel: bad form");
}

}  // namespace she
