#include "she/solver.hpp"

#include "she/stats.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace she {

SigmaSpec SigmaSpec::constant(double c) {
  SigmaSpec s;
  s.value = c;
  s.c1 = s.c2 = c;
  s.lip = 0.0;
  return s;
}

SigmaSpec SigmaSpec::bounded(std::function<double(double, double, double)> f, double c1, double c2,
                             double lip) {
  if (!(c1 > 0) || c2 < c1) throw std::domain_error("SigmaSpec: need 0 < c1 <= c2");
  SigmaSpec s;
  s.fn = std::move(f);
  s.c1 = c1;
  s.c2 = c2;
  s.lip = lip;
  return s;
}

double SigmaSpec::operator()(double t, double x, double u) const {
  const double v = fn ? fn(t, x, u) : value;
  if (v < c1 - 1e-12 || v > c2 + 1e-12) {
    std::ostringstream os;
    os << "sigma bound violated: sigma(" << t << ", " << x << ", " << u << ") = " << v
       << " outside [" << c1 << ", " << c2 << "]";
    throw numeric_error(os.str());
  }
  return v;
}

double LatticePath::sup_abs() const {
  double s = 0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

namespace {

std::vector<double> lattice_points(int J) {
  std::vector<double> xs(J + 1);
  const double dx = 2.0 / J;
  for (int j = 0; j <= J; ++j) xs[j] = -1.0 + j * dx;
  return xs;
}

void check_time_params(double T, double dt) {
  if (!(T > 0)) throw std::domain_error("solver: T must be positive");
  if (!(dt > 0)) throw std::domain_error("solver: dt must be positive");
}

}  // namespace

void stream_constant_sigma(const RieszKernel& kernel, double sigma, double T, double dt, int J,
                           const RngSpec& rng,
                           const std::function<bool(std::size_t, double, std::span<const double>)>& visit,
                           const SpectralProfile* u0) {
  check_time_params(T, dt);
  if (J < 2) throw std::domain_error("solver: need at least 2 lattice cells");
  const auto xs = lattice_points(J);
  const TrigTable table = make_trig_table(kernel.mode_count, xs);
  const OuPropagator prop(kernel, dt);
  SpectralState noise = make_zero_state(kernel);
  const std::size_t steps = static_cast<std::size_t>(std::llround(T / dt));

  const int N = kernel.mode_count;
  std::vector<double> u0a, u0b;  // deterministic mode amplitudes
  if (u0) {
    u0a = u0->a;
    u0b = u0->b;
    u0a.resize(N + 1, 0.0);
    u0b.resize(N + 1, 0.0);
  }

  std::vector<double> field(xs.size()), decayed(xs.size(), 0.0), total(xs.size());
  SpectralState det;  // deterministic part evolves by pure decay
  if (u0) {
    det = make_zero_state(kernel);
    det.a = u0a;
    det.b = u0b;
  }

  auto emit = [&](std::size_t m, double t) {
    evaluate_field(noise, table, field);
    if (u0) {
      evaluate_field(det, table, decayed);
      for (std::size_t j = 0; j < total.size(); ++j) total[j] = decayed[j] + sigma * field[j];
    } else {
      for (std::size_t j = 0; j < total.size(); ++j) total[j] = sigma * field[j];
    }
    return visit(m, t, total);
  };

  if (!emit(0, 0.0)) return;
  for (std::size_t m = 1; m <= steps; ++m) {
    prop.step(noise, rng);
    if (u0) {
      for (int n = 0; n <= N; ++n) {
        const double decay = std::exp(-M_PI * M_PI * n * n * dt);
        det.a[n] *= decay;
        det.b[n] *= decay;
      }
      det.t += dt;
    }
    if (!emit(m, m * dt)) return;
  }
}

LatticePath solve_constant_sigma(const RieszKernel& kernel, double sigma, double T, double dt,
                                 int J, const RngSpec& rng, const SpectralProfile* u0) {
  check_time_params(T, dt);
  LatticePath path;
  path.dx = 2.0 / J;
  path.dt = dt;
  path.steps = static_cast<std::size_t>(std::llround(T / dt));
  path.points = J + 1;
  path.values.assign((path.steps + 1) * path.points, 0.0);
  path.meta = {kernel.gamma, kernel.mode_count, rng.seed, rng.stream};
  stream_constant_sigma(kernel, sigma, T, dt, J, rng,
                        [&](std::size_t m, double, std::span<const double> u) {
                          for (std::size_t j = 0; j < u.size(); ++j)
                            path.values[m * path.points + j] = u[j];
                          return true;
                        },
                        u0);
  return path;
}

LatticePath solve_general(const RieszKernel& kernel, const SigmaSpec& sigma,
                          std::span<const double> u0, double T, double dt, double dx,
                          const RngSpec& rng, int noise_modes) {
  check_time_params(T, dt);
  if (!(dx > 0)) throw std::domain_error("solve_general: dx must be positive");
  const int J = static_cast<int>(std::llround(2.0 / dx));
  if (std::abs(J * dx - 2.0) > 1e-9)
    throw std::domain_error("solve_general: dx must divide the torus length 2");
  if (dt > dx * dx / 4.0 + 1e-15)
    throw std::domain_error("solve_general: explicit scheme requires dt <= dx^2/4");
  if (!u0.empty() && u0.size() != static_cast<std::size_t>(J) + 1)
    throw std::invalid_argument("solve_general: u0 must have J+1 entries (periodic)");

  if (noise_modes <= 0) noise_modes = static_cast<int>(std::llround(1.0 / dx));
  if (noise_modes > kernel.mode_count)
    throw std::invalid_argument("solve_general: kernel has too few modes for requested noise");

  const auto xs = lattice_points(J);
  const TrigTable table = make_trig_table(noise_modes, std::span<const double>(xs.data(), J));

  LatticePath path;
  path.dx = dx;
  path.dt = dt;
  path.steps = static_cast<std::size_t>(std::llround(T / dt));
  path.points = J + 1;
  path.values.assign((path.steps + 1) * path.points, 0.0);
  path.meta = {kernel.gamma, noise_modes, rng.seed, rng.stream};

  std::vector<double> u(J), unext(J), noise(J);
  if (!u0.empty())
    for (int j = 0; j < J; ++j) u[j] = u0[j];
  for (int j = 0; j < J; ++j) path.values[j] = u[j];
  path.values[J] = u[0];

  const double r = dt / (dx * dx);
  for (std::size_t m = 0; m < path.steps; ++m) {
    lattice_noise_increment(kernel, table, noise_modes, dt, rng, m, noise);
    const double tm = m * dt;
    for (int j = 0; j < J; ++j) {
      const double up = u[(j + 1) % J], um = u[(j + J - 1) % J];
      unext[j] = u[j] + r * (up - 2.0 * u[j] + um) + sigma(tm, xs[j], u[j]) * noise[j];
      if (!std::isfinite(unext[j]))
        throw numeric_error("solve_general: non-finite value at step " + std::to_string(m));
    }
    std::swap(u, unext);
    double* row = &path.values[(m + 1) * path.points];
    for (int j = 0; j < J; ++j) row[j] = u[j];
    row[J] = u[0];
  }
  return path;
}

FactorizationReport factorization_check_on_path(double alpha, int mode, double T,
                                                std::span<const double> dB) {
  const std::size_t M = dB.size();
  if (M == 0) throw std::invalid_argument("factorization_check: empty path");
  const double dt = T / static_cast<double>(M);
  const double c = M_PI * M_PI * mode * mode;

  // lhs: Ito sum with left endpoints s_i = i dt
  double lhs = 0;
  for (std::size_t i = 0; i < M; ++i) lhs += std::exp(-c * (T - i * dt)) * dB[i];

  // Y at grid points r_k = k dt, k = 1..M
  std::vector<double> Y(M, 0.0);
  for (std::size_t k = 1; k <= M; ++k) {
    const double rk = k * dt;
    double acc = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double d = rk - i * dt;
      acc += std::pow(d, -alpha) * std::exp(-c * d) * dB[i];
    }
    Y[k - 1] = acc;
  }

  // outer integral: per-panel exact power weight (the w = (T-r)^alpha change
  // of variable), midpoint exponential, Y at the panel's left grid point
  double rhs = 0;
  for (std::size_t k = 1; k <= M; ++k) {
    const double lo = (k - 1) * dt, hi = k * dt;
    const double w = (std::pow(T - lo, alpha) - std::pow(T - hi, alpha)) / alpha;
    const double mid = 0.5 * (lo + hi);
    const double y = (k == 1) ? 0.0 : Y[k - 2];  // Y(r_{k-1}), Y(0) = 0
    rhs += w * std::exp(-c * (T - mid)) * y;
  }
  rhs *= std::sin(M_PI * alpha) / M_PI;

  FactorizationReport rep;
  rep.alpha = alpha;
  rep.mode = mode;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.dt = dt;
  const double scale = std::max(std::abs(lhs), 1e-300);
  rep.rel_err = std::abs(lhs - rhs) / scale;
  return rep;
}

FactorizationReport factorization_check(double alpha, double gamma, int mode, double T,
                                        double dt_fine, const RngSpec& rng) {
  if (!(alpha > 0) || alpha >= (2.0 - gamma) / 4.0)
    throw std::domain_error("factorization_check: alpha must lie in (0, (2-gamma)/4)");
  check_time_params(T, dt_fine);
  const std::size_t M = static_cast<std::size_t>(std::llround(T / dt_fine));
  std::vector<double> dB(M);
  const double s = std::sqrt(dt_fine);
  for (std::size_t i = 0; i < M; ++i)
    dB[i] = s * gauss_pair(rng, draw_counter(DrawPurpose::sequential, i, 0)).first;
  return factorization_check_on_path(alpha, mode, T, dB);
}

namespace {

// g(z) = int_0^z v^{-2a} e^{-v} dv via the substitution w = v^{1-2a}.
double lower_incomplete_scaled(double two_alpha, double z) {
  const double p = 1.0 - two_alpha;  // > 0
  const double zcap = std::min(z, 45.0);  // beyond this e^{-v} < 3e-20
  const double wmax = std::pow(zcap, p);
  const auto f = [&](double w) { return std::exp(-std::pow(w, 1.0 / p)); };
  return integrate_gl(f, 0.0, wmax, 24, 16) / p;
}

}  // namespace

YAlphaMoment y_alpha_second_moment(double alpha, const RieszKernel& kernel, double r, double c2) {
  if (!(alpha > 0) || alpha >= (2.0 - kernel.gamma) / 4.0)
    throw std::domain_error("y_alpha_second_moment: alpha must lie in (0, (2-gamma)/4)");
  if (!(r > 0)) throw std::domain_error("y_alpha_second_moment: r must be positive");
  const double two_alpha = 2.0 * alpha;
  const int N = kernel.mode_count;

  // q_0 term: int_0^r u^{-2a} du
  double series = kernel.q[0] * std::pow(r, 1.0 - two_alpha) / (1.0 - two_alpha);
  double bracket = kernel.q[0];
  const double gam = std::tgamma(1.0 - two_alpha);
  for (int n = 1; n <= N; ++n) {
    const double c = 2.0 * M_PI * M_PI * n * n;
    // int_0^r u^{-2a} e^{-c u} du = c^{2a-1} g(c r)
    series += kernel.q[n] * std::pow(c, two_alpha - 1.0) * lower_incomplete_scaled(two_alpha, c * r);
    bracket += kernel.q[n] * std::pow(static_cast<double>(n), 4.0 * alpha - 2.0) * gam;
  }
  YAlphaMoment out;
  out.value = c2 * c2 * series;
  out.bound = bracket;
  out.fitted_C = out.value / (c2 * c2 * bracket);
  // tail of the series decays like n^{gamma-1} * n^{4a-2}; estimate by the integral
  const double expo = kernel.gamma - 1.0 + 4.0 * alpha - 2.0;  // < -1 in the valid range
  const double tail = (N > 1 && expo < -1.0)
                          ? 2.2 * gam * std::pow(static_cast<double>(N), expo + 1.0) / (-expo - 1.0)
                          : 0.0;
  out.tail_ok = tail <= 1e-6 * std::max(series, 1e-300) + 1e-12;
  if (!out.tail_ok && series > 0 && tail / series > 1e-3)
    throw numeric_error("y_alpha_second_moment: series truncation too coarse");
  return out;
}

}  // namespace she
