#include "she/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace she {

double GridSpec::f_threshold() const { return std::pow(t1, (2.0 - gamma) / 4.0); }
double GridSpec::e_threshold() const { return std::pow(epsilon, 2.0 - gamma); }

GridSpec make_grid(double epsilon, double gamma, double C0, double T) {
  if (gamma <= 0 || gamma >= 1) throw std::domain_error("make_grid: gamma must lie in (0,1)");
  if (!(epsilon > 0) || epsilon >= 1) throw std::domain_error("make_grid: epsilon must lie in (0,1)");
  if (!(C0 > 0)) throw std::domain_error("make_grid: C0 must be positive");
  GridSpec g;
  g.epsilon = epsilon;
  g.gamma = gamma;
  g.C0 = C0;
  g.T = T;
  g.c0 = C0 * std::pow(epsilon, (4.0 - 4.0 * gamma) / gamma);
  g.t1 = g.c0 * std::pow(epsilon, 4.0);
  // min{ n : n eps^2 > 1 } in exact-arithmetic intent: ties (n eps^2 == 1)
  // do not count, and binary rounding must not flip the comparison.
  g.n1 = static_cast<int>(std::floor((1.0 / (epsilon * epsilon)) * (1.0 + 1e-12))) + 1;
  return g;
}

namespace {

std::size_t nearest_time_index(const LatticePath& path, double t) {
  const double m = t / path.dt;
  const auto mi = static_cast<long long>(std::llround(m));
  if (mi < 0 || static_cast<std::size_t>(mi) > path.steps)
    throw std::out_of_range("event: time " + std::to_string(t) + " outside path coverage");
  return static_cast<std::size_t>(mi);
}

std::size_t nearest_space_index(const LatticePath& path, double x) {
  const auto j = static_cast<long long>(std::llround((x + 1.0) / path.dx));
  if (j < 0 || static_cast<std::size_t>(j) >= path.points)
    throw std::out_of_range("event: position " + std::to_string(x) + " outside path coverage");
  return static_cast<std::size_t>(j);
}

}  // namespace

bool event_F(const LatticePath& path, const GridSpec& grid, int n, double threshold_override) {
  const double thr = threshold_override > 0 ? threshold_override : grid.f_threshold();
  const std::size_t m = nearest_time_index(path, n * grid.t1);
  for (int j = -grid.n1 + 1; j <= grid.n1 - 1; ++j) {
    const double x = j * grid.epsilon * grid.epsilon;
    if (std::abs(path.at(m, nearest_space_index(path, x))) > thr) return false;
  }
  return true;
}

bool event_E(const LatticePath& path, const GridSpec& grid, int n) {
  const double thr_slab = grid.e_threshold();
  const double thr_end = thr_slab / 3.0;
  const double t_lo = n * grid.t1, t_hi = (n + 1) * grid.t1;
  const std::size_t m_end = nearest_time_index(path, t_hi);
  // endpoint condition at t_{n+1}
  for (std::size_t j = 0; j < path.points; ++j)
    if (std::abs(path.at(m_end, j)) > thr_end) return false;
  // slab condition over lattice nodes with t in [t_n, t_{n+1}]
  const auto m_lo = static_cast<std::size_t>(std::max<long long>(0, std::llround(std::ceil(t_lo / path.dt - 1e-9))));
  for (std::size_t m = m_lo; m <= m_end; ++m)
    for (std::size_t j = 0; j < path.points; ++j)
      if (std::abs(path.at(m, j)) > thr_slab) return false;
  return true;
}

std::vector<std::vector<double>> campaign_sups(const SmallBallConfig& cfg,
                                               std::span<const double> T_checkpoints,
                                               std::uint64_t trials, const RngSpec& rng,
                                               double cap) {
  if (!cfg.kernel) throw std::invalid_argument("campaign_sups: config has no kernel");
  if (T_checkpoints.empty()) throw std::invalid_argument("campaign_sups: no checkpoints");
  std::vector<double> cps(T_checkpoints.begin(), T_checkpoints.end());
  std::sort(cps.begin(), cps.end());
  const double T_max = cps.back();
  const std::size_t steps = static_cast<std::size_t>(std::llround(T_max / cfg.dt));
  std::vector<std::size_t> cp_steps(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i)
    cp_steps[i] = static_cast<std::size_t>(std::llround(cps[i] / cfg.dt));

  std::vector<std::vector<double>> out(cps.size(), std::vector<double>(trials, 0.0));

  const RieszKernel& kernel = *cfg.kernel;
  for_each_trial(trials, cfg.exec, [&](std::size_t trial) {
    RngSpec trial_rng{rng.seed, rng.stream + trial};
    double running = 0;
    std::size_t next_cp = 0;
    stream_constant_sigma(
        kernel, cfg.sigma, T_max, cfg.dt, cfg.J, trial_rng,
        [&](std::size_t m, double, std::span<const double> u) {
          for (double v : u) running = std::max(running, std::abs(v));
          while (next_cp < cp_steps.size() && m == cp_steps[next_cp]) {
            out[next_cp][trial] = running;
            ++next_cp;
          }
          if (running > cap) {
            // above every threshold of interest from here on; freeze the value
            for (std::size_t k = next_cp; k < cp_steps.size(); ++k) out[k][trial] = running;
            return false;
          }
          return true;
        });
  });
  return out;
}

SmallBallResult result_from_sups(std::span<const double> sups, double eps_ball, double T,
                                 const SmallBallConfig& cfg) {
  SmallBallResult r;
  r.epsilon = eps_ball;
  r.T = T;
  r.trials = sups.size();
  for (double s : sups)
    if (s <= eps_ball) ++r.hits;
  r.p_hat = static_cast<double>(r.hits) / static_cast<double>(r.trials);
  if (r.hits == 0) {
    r.low_information = true;
    r.ci_lo = 0.0;
    r.ci_hi = rule_of_three_upper(r.trials);
  } else {
    const auto ci = binomial_ci(r.hits, r.trials);
    r.ci_lo = ci.lo;
    r.ci_hi = ci.hi;
  }
  r.dx = 2.0 / cfg.J;
  r.dt = cfg.dt;
  r.modes = cfg.kernel ? cfg.kernel->mode_count : 0;
  return r;
}

SmallBallResult estimate_small_ball(double eps_ball, double T, std::uint64_t trials,
                                    const SmallBallConfig& cfg, const RngSpec& rng) {
  if (trials < 1) throw std::domain_error("estimate_small_ball: trials must be >= 1");
  if (!(T > 0)) throw std::domain_error("estimate_small_ball: T must be positive");
  const double cps[1] = {T};
  const auto sups = campaign_sups(cfg, cps, trials, rng, eps_ball);
  return result_from_sups(sups[0], eps_ball, T, cfg);
}

SmallBallResult estimate_small_ball_splitting(double eps_ball, double T, int windows,
                                              std::uint64_t particles, const SmallBallConfig& cfg,
                                              const RngSpec& rng) {
  if (!cfg.kernel) throw std::invalid_argument("splitting: config has no kernel");
  if (windows < 1 || particles < 2) throw std::domain_error("splitting: bad configuration");
  const RieszKernel& kernel = *cfg.kernel;
  const double Tw = T / windows;
  const std::size_t steps_per_window = static_cast<std::size_t>(std::llround(Tw / cfg.dt));
  if (steps_per_window == 0) throw std::domain_error("splitting: window shorter than dt");

  std::vector<double> xs(cfg.J + 1);
  for (int j = 0; j <= cfg.J; ++j) xs[j] = -1.0 + j * (2.0 / cfg.J);
  const TrigTable table = make_trig_table(kernel.mode_count, xs);
  const OuPropagator prop(kernel, cfg.dt);

  std::vector<SpectralState> states(particles, make_zero_state(kernel));
  std::vector<SpectralState> next(particles, make_zero_state(kernel));
  std::vector<std::uint8_t> alive(particles, 1);
  double log_p = 0.0;
  double var_log = 0.0;

  for (int w = 0; w < windows; ++w) {
    for_each_trial(particles, cfg.exec, [&](std::size_t i) {
      RngSpec prng{rng.seed, rng.stream + i};
      std::vector<double> field(xs.size());
      double wsup = 0;
      for (std::size_t s = 0; s < steps_per_window && wsup <= eps_ball; ++s) {
        prop.step(states[i], prng);
        evaluate_field(states[i], table, field);
        for (double v : field) wsup = std::max(wsup, std::abs(v) * cfg.sigma);
      }
      alive[i] = wsup <= eps_ball ? 1 : 0;
    });
    std::vector<std::uint32_t> survivors;
    for (std::uint64_t i = 0; i < particles; ++i)
      if (alive[i]) survivors.push_back(static_cast<std::uint32_t>(i));
    const double rho = static_cast<double>(survivors.size()) / static_cast<double>(particles);
    if (survivors.empty()) {
      SmallBallResult r;
      r.epsilon = eps_ball;
      r.T = T;
      r.trials = particles;
      r.hits = 0;
      r.p_hat = 0;
      r.low_information = true;
      r.ci_hi = rule_of_three_upper(particles);
      r.dx = 2.0 / cfg.J;
      r.dt = cfg.dt;
      r.modes = kernel.mode_count;
      return r;
    }
    log_p += std::log(rho);
    var_log += (1.0 - rho) / (rho * static_cast<double>(particles));
    if (w + 1 < windows) {
      for (std::uint64_t i = 0; i < particles; ++i) {
        if (alive[i]) {
          next[i] = states[i];
        } else {
          const auto [u1, u2] =
              uniform_pair(RngSpec{rng.seed, rng.stream},
                           draw_counter(DrawPurpose::resample, static_cast<std::uint64_t>(w), i));
          (void)u2;
          next[i] = states[survivors[static_cast<std::size_t>(u1 * survivors.size()) % survivors.size()]];
        }
      }
      std::swap(states, next);
    }
  }

  SmallBallResult r;
  r.epsilon = eps_ball;
  r.T = T;
  r.trials = particles;
  r.p_hat = std::exp(log_p);
  r.hits = static_cast<std::uint64_t>(std::llround(r.p_hat * static_cast<double>(particles)));
  const double se = std::sqrt(var_log);
  r.ci_lo = std::exp(log_p - 1.96 * se);
  r.ci_hi = std::min(1.0, std::exp(log_p + 1.96 * se));
  r.dx = 2.0 / cfg.J;
  r.dt = cfg.dt;
  r.modes = kernel.mode_count;
  return r;
}

std::pair<double, double> theta_bracket(double gamma) {
  return {(2.0 * gamma + 4.0) / (2.0 - gamma), (2.0 * gamma + 4.0) / (gamma * (2.0 - gamma))};
}

ExponentFit fit_exponent(std::span<const SmallBallResult> results, double gamma) {
  std::vector<double> x, y, w;
  for (const auto& r : results) {
    if (r.hits == 0 || r.p_hat >= 1.0) continue;
    const double p = r.p_hat;
    x.push_back(std::log(r.epsilon));
    y.push_back(std::log(-std::log(p)));
    const double var_p = p * (1.0 - p) / static_cast<double>(r.trials);
    w.push_back(p * p * std::log(p) * std::log(p) / var_p);
  }
  if (x.size() < 3) throw numeric_error("fit_exponent: need >= 3 radii with nonzero hits");
  const LineFit fit = fit_line_weighted(x, y, w);
  ExponentFit out;
  out.theta_hat = -fit.slope;
  out.stderr_ = fit.slope_stderr;
  const auto [up, lo] = theta_bracket(gamma);
  out.theta_upper = up;
  out.theta_lower = lo;
  out.bracket_hit = out.theta_hat + 2.0 * out.stderr_ >= up && out.theta_hat - 2.0 * out.stderr_ <= lo;
  return out;
}

LinearityReport fit_rate_linearity(std::span<const SmallBallResult> results) {
  LinearityReport rep;
  for (const auto& r : results) {
    if (r.hits == 0) continue;
    rep.T.push_back(r.T);
    rep.neg_log_p.push_back(-std::log(r.p_hat));
  }
  if (rep.T.size() < 3) throw numeric_error("rate_linearity: need >= 3 horizons with nonzero hits");
  const LineFit fit = fit_line(rep.T, rep.neg_log_p);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.r2 = fit.r2;
  rep.slope_positive = fit.slope > 0;
  return rep;
}

LinearityReport rate_linearity_in_T(double eps_ball, std::span<const double> Ts,
                                    std::uint64_t trials, const SmallBallConfig& cfg,
                                    const RngSpec& rng) {
  if (Ts.size() < 3) throw std::domain_error("rate_linearity_in_T: need >= 3 horizons");
  const auto sups = campaign_sups(cfg, Ts, trials, rng, eps_ball);
  std::vector<double> sorted(Ts.begin(), Ts.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<SmallBallResult> results;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    results.push_back(result_from_sups(sups[i], eps_ball, sorted[i], cfg));
  return fit_rate_linearity(results);
}

}  // namespace she
