#pragma once

namespace she {

// Heat kernel G(t,x) on the torus [-1,1], unit mass: integral over one period is 1.
//
// Two equivalent series:
//   image sum:  G(t,x) = sum_n (4 pi t)^{-1/2} exp(-(x+2n)^2 / 4t)
//   spectral:   G(t,x) = 1/2 + sum_{n>=1} exp(-pi^2 n^2 t) cos(n pi x)
// The image sum converges fast for small t, the spectral one for large t.

enum class HeatKernelForm { image_sum, spectral, auto_select };

struct HeatKernelQuery {
  double t = 0;
  double x = 0;
  HeatKernelForm form = HeatKernelForm::auto_select;
};

// auto_select switches from image_sum to spectral at this t.
inline constexpr double kHeatKernelCrossover = 0.3;
// image sum truncation |n| <= 7; spectral terms kept while exp(-pi^2 n^2 t) >= 1e-16
inline constexpr int kImageTerms = 7;
inline constexpr double kSpectralCutoff = 1e-16;

double heat_kernel(const HeatKernelQuery& q);

inline double heat_kernel(double t, double x, HeatKernelForm form = HeatKernelForm::auto_select) {
  return heat_kernel(HeatKernelQuery{t, x, form});
}

}  // namespace she
