#pragma once

#include <cstdint>
#include <cmath>
#include <utility>

// Counter-based RNG (Philox4x32-10, Salmon et al. SC'11) plus Gaussian draws.
//
// Every random number in this project is a pure function of
// (seed, stream, counter).  Trials map to streams, per-step/per-mode draws
// map to counter blocks, so results are reproducible bit-for-bit regardless
// of thread count or scheduling.

namespace she {

struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct U32x4 { std::uint32_t v[4]; };

inline void philox_round(U32x4& c, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c.v[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c.v[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  c = U32x4{{hi1 ^ c.v[1] ^ k0, lo1, hi0 ^ c.v[3] ^ k1, lo0}};
}

inline U32x4 philox4x32_10(U32x4 ctr, std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) { k0 += kPhiloxW0; k1 += kPhiloxW1; }
    philox_round(ctr, k0, k1);
  }
  return ctr;
}

inline double u64_to_unit(std::uint64_t x) {
  // 53-bit mantissa, strictly inside (0,1)
  return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace detail

// One 128-bit Philox block keyed by (seed; stream, counter) -> two uniforms in (0,1).
inline std::pair<double, double> uniform_pair(const RngSpec& rng, std::uint64_t counter) {
  detail::U32x4 ctr{{static_cast<std::uint32_t>(counter),
                     static_cast<std::uint32_t>(counter >> 32),
                     static_cast<std::uint32_t>(rng.stream),
                     static_cast<std::uint32_t>(rng.stream >> 32)}};
  const auto out = detail::philox4x32_10(ctr, static_cast<std::uint32_t>(rng.seed),
                                         static_cast<std::uint32_t>(rng.seed >> 32));
  const std::uint64_t a = (static_cast<std::uint64_t>(out.v[1]) << 32) | out.v[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(out.v[3]) << 32) | out.v[2];
  return {detail::u64_to_unit(a), detail::u64_to_unit(b)};
}

// Box-Muller on one counter block: two independent N(0,1) draws.
inline std::pair<double, double> gauss_pair(const RngSpec& rng, std::uint64_t counter) {
  const auto [u1, u2] = uniform_pair(rng, counter);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

// Counter-space layout: an 8-bit purpose tag keeps independent subsystems on
// disjoint blocks within the same (seed, stream).
enum class DrawPurpose : std::uint64_t {
  ou_mode = 1,        // spectral OU innovations, counter = (step, mode)
  lattice_noise = 2,  // synthesized lattice noise, counter = (step, mode)
  sequential = 3,     // free-running draws
  resample = 4,       // splitting-estimator resampling choices
};

inline std::uint64_t draw_counter(DrawPurpose p, std::uint64_t step, std::uint64_t mode) {
  return (static_cast<std::uint64_t>(p) << 56) | ((step & 0xFFFFFFFFull) << 24) | (mode & 0xFFFFFFull);
}

// Stateful convenience wrapper for code that just wants a sequence.
class SequentialRng {
 public:
  explicit SequentialRng(RngSpec spec, DrawPurpose purpose = DrawPurpose::sequential)
      : spec_(spec), base_(static_cast<std::uint64_t>(purpose) << 56) {}

  double uniform() {
    if (have_) { have_ = false; return hold_; }
    auto [u1, u2] = uniform_pair(spec_, base_ | counter_++);
    hold_ = u2; have_ = true;
    return u1;
  }

  double normal() {
    if (have_n_) { have_n_ = false; return hold_n_; }
    auto [z1, z2] = gauss_pair(spec_, base_ | counter_++);
    hold_n_ = z2; have_n_ = true;
    return z1;
  }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  RngSpec spec_;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  bool have_ = false, have_n_ = false;
  double hold_ = 0, hold_n_ = 0;
};

}  // namespace she
