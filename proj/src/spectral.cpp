#include "she/spectral.hpp"

#include "she/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace she {

SpectralState make_zero_state(const RieszKernel& kernel) {
  // existence condition sum q_n / n^2 < infinity always holds for gamma in (0,1)
  SpectralState s;
  s.kernel = &kernel;
  s.a.assign(kernel.mode_count + 1, 0.0);
  s.b.assign(kernel.mode_count + 1, 0.0);
  return s;
}

OuPropagator::OuPropagator(const RieszKernel& kernel, double dt) : dt_(dt) {
  if (!(dt > 0)) throw std::domain_error("OuPropagator: dt must be positive");
  const int N = kernel.mode_count;
  decay_.resize(N + 1);
  sd_.resize(N + 1);
  decay_[0] = 1.0;
  sd_[0] = std::sqrt(kernel.q[0] * dt);
  for (int n = 1; n <= N; ++n) {
    const double lam = M_PI * M_PI * n * n;
    decay_[n] = std::exp(-lam * dt);
    sd_[n] = std::sqrt(kernel.q[n] * (1.0 - decay_[n] * decay_[n]) / (2.0 * lam));
  }
}

void OuPropagator::step(SpectralState& state, const RngSpec& rng) const {
  const int N = static_cast<int>(decay_.size()) - 1;
  if (static_cast<int>(state.a.size()) != N + 1)
    throw std::invalid_argument("OuPropagator::step: state/kernel size mismatch");
  for (int n = 0; n <= N; ++n) {
    if (!std::isfinite(state.a[n]) || !std::isfinite(state.b[n]))
      throw numeric_error("ou_step: non-finite state amplitude");
    const auto [za, zb] = gauss_pair(rng, draw_counter(DrawPurpose::ou_mode, state.step, n));
    state.a[n] = decay_[n] * state.a[n] + sd_[n] * za;
    if (n > 0) state.b[n] = decay_[n] * state.b[n] + sd_[n] * zb;
  }
  state.t += dt_;
  state.step += 1;
}

void ou_step(SpectralState& state, double dt, const RngSpec& rng) {
  if (!state.kernel) throw std::invalid_argument("ou_step: state has no kernel");
  OuPropagator(*state.kernel, dt).step(state, rng);
}

std::vector<double> evaluate_field(const SpectralState& state, std::span<const double> xs) {
  const int N = static_cast<int>(state.a.size()) - 1;
  std::vector<double> out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double acc = state.a[0];
    for (int n = 1; n <= N; ++n) {
      const double ph = n * M_PI * xs[j];
      acc += state.a[n] * std::cos(ph) + state.b[n] * std::sin(ph);
    }
    out[j] = acc;
  }
  return out;
}

TrigTable make_trig_table(int modes, std::span<const double> xs) {
  TrigTable t;
  t.modes = modes;
  t.points = xs.size();
  t.cosv.resize(static_cast<std::size_t>(modes) * xs.size());
  t.sinv.resize(static_cast<std::size_t>(modes) * xs.size());
  for (int n = 1; n <= modes; ++n)
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double ph = n * M_PI * xs[j];
      t.cosv[(n - 1) * xs.size() + j] = std::cos(ph);
      t.sinv[(n - 1) * xs.size() + j] = std::sin(ph);
    }
  return t;
}

void evaluate_field(const SpectralState& state, const TrigTable& table, std::span<double> out) {
  const int N = static_cast<int>(state.a.size()) - 1;
  if (table.modes < N || out.size() != table.points)
    throw std::invalid_argument("evaluate_field: table/state mismatch");
  const std::size_t J = table.points;
  for (std::size_t j = 0; j < J; ++j) out[j] = state.a[0];
  for (int n = 1; n <= N; ++n) {
    const double an = state.a[n], bn = state.b[n];
    const double* c = &table.cosv[(n - 1) * J];
    const double* s = &table.sinv[(n - 1) * J];
    for (std::size_t j = 0; j < J; ++j) out[j] += an * c[j] + bn * s[j];
  }
}

void lattice_noise_increment(const RieszKernel& kernel, const TrigTable& table, int modes,
                             double dt, const RngSpec& rng, std::uint64_t step,
                             std::span<double> out) {
  if (modes > table.modes || modes > kernel.mode_count)
    throw std::invalid_argument("lattice_noise_increment: mode count exceeds table/kernel");
  const std::size_t J = table.points;
  const double sdt = std::sqrt(dt);
  const auto [z0, z0b] = gauss_pair(rng, draw_counter(DrawPurpose::lattice_noise, step, 0));
  (void)z0b;
  const double base = std::sqrt(kernel.q[0]) * z0;
  for (std::size_t j = 0; j < J; ++j) out[j] = base;
  for (int n = 1; n <= modes; ++n) {
    const auto [zc, zs] = gauss_pair(rng, draw_counter(DrawPurpose::lattice_noise, step, n));
    const double wc = std::sqrt(kernel.q[n]) * zc;
    const double ws = std::sqrt(kernel.q[n]) * zs;
    const double* c = &table.cosv[(n - 1) * J];
    const double* s = &table.sinv[(n - 1) * J];
    for (std::size_t j = 0; j < J; ++j) out[j] += wc * c[j] + ws * s[j];
  }
  for (std::size_t j = 0; j < J; ++j) out[j] *= sdt;
}

std::vector<double> lattice_noise_increment(const RieszKernel& kernel, std::span<const double> xs,
                                            double dt, const RngSpec& rng, std::uint64_t step) {
  const TrigTable table = make_trig_table(kernel.mode_count, xs);
  std::vector<double> out(xs.size());
  lattice_noise_increment(kernel, table, kernel.mode_count, dt, rng, step, out);
  return out;
}

}  // namespace she
