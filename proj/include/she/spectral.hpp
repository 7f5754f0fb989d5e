#pragma once

#include "she/riesz.hpp"
#include "she/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace she {

// Per-mode amplitudes of the stochastic convolution N(t,x) at one time instant:
//   N(t,x) = a_0 + sum_{n>=1} a_n cos(n pi x) + b_n sin(n pi x),
// with the sqrt(q_n) scaling folded into the amplitudes.  From a zero state
// with unit sigma, Var a_n(t) = q_n (1 - e^{-2 pi^2 n^2 t}) / (2 pi^2 n^2)
// for n >= 1 and Var a_0(t) = q_0 t; identically for b_n.
struct SpectralState {
  double t = 0;
  std::uint64_t step = 0;  // number of ou_step calls taken, keys the RNG counter
  std::vector<double> a;   // [0..N]
  std::vector<double> b;   // [0..N], b[0] stays 0
  const RieszKernel* kernel = nullptr;
};

SpectralState make_zero_state(const RieszKernel& kernel);

// Exact one-step OU transition coefficients for a fixed dt, reusable across steps.
class OuPropagator {
 public:
  OuPropagator(const RieszKernel& kernel, double dt);
  // advance by dt; innovations are keyed by (rng, state.step, mode)
  void step(SpectralState& state, const RngSpec& rng) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  std::vector<double> decay_;  // e^{-pi^2 n^2 dt}
  std::vector<double> sd_;     // innovation standard deviations
};

// Single exact OU transition (convenience form of the same operation).
void ou_step(SpectralState& state, double dt, const RngSpec& rng);

// Evaluate the field at arbitrary positions.
std::vector<double> evaluate_field(const SpectralState& state, std::span<const double> xs);

// Precomputed trig tables for repeated evaluation on a fixed lattice.
struct TrigTable {
  int modes = 0;
  std::size_t points = 0;
  std::vector<double> cosv;  // modes x points, row-major, n = 1..modes
  std::vector<double> sinv;
};
TrigTable make_trig_table(int modes, std::span<const double> xs);
void evaluate_field(const SpectralState& state, const TrigTable& table, std::span<double> out);

// Synthesized colored-noise increment on a lattice:
//   dF_j = sqrt(dt) [ sqrt(q_0) xi_0 + sum_n sqrt(q_n)(cos(n pi x_j) xi_n + sin(n pi x_j) xi~_n) ]
// Cov(dF_j, dF_k) = dt * Lambda_N(x_j - x_k).
std::vector<double> lattice_noise_increment(const RieszKernel& kernel, std::span<const double> xs,
                                            double dt, const RngSpec& rng, std::uint64_t step = 0);
// fast path reusing a trig table restricted to `modes` rows (modes <= table.modes)
void lattice_noise_increment(const RieszKernel& kernel, const TrigTable& table, int modes,
                             double dt, const RngSpec& rng, std::uint64_t step,
                             std::span<double> out);

}  // namespace she
