#pragma once

// Counter-keyed deterministic random streams.
//
// Every random draw in the library flows through CounterRng. A stream is
// derived from an explicit key (master seed + purpose + indices), never from
// shared mutable state, so any unit of work can be recomputed in isolation:
// bootstrap iteration k produces the same indices whether it runs first,
// last, or on another worker thread. Standard-library distributions are
// avoided on purpose; their output is implementation-defined and would break
// cross-build reproducibility.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace fairaudit {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Purpose tags keep independent streams from colliding even when their
// numeric sub-keys coincide.
enum class Stream : std::uint64_t {
  Bootstrap = 0xB001,
  ScenarioLatent = 0xB002,
  ScenarioScore = 0xB003,
  TrainerData = 0xB004,
  TrainerShuffle = 0xB005,
  TestHarness = 0xB006,
};

class CounterRng {
public:
  CounterRng(std::initializer_list<std::uint64_t> key) : state_(0x6A09E667F3BCC909ULL) {
    for (std::uint64_t k : key) state_ = mix64(state_ ^ (k + kGoldenGamma + (state_ << 6) + (state_ >> 2)));
  }
  CounterRng(std::uint64_t seed, Stream s, std::uint64_t a = 0, std::uint64_t b = 0)
      : CounterRng{seed, static_cast<std::uint64_t>(s), a, b} {}

  std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_unit() < p; }

  // Uniform in [0, bound) without modulo bias (Lemire with rejection).
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) return 0;
    while (true) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * bound;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (0 - bound) % bound) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // Standard normal via Box-Muller; the spare keeps draw counts even.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Marsaglia-Tsang for shape >= 1; boosted by U^(1/shape) below 1.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      double u = next_unit();
      if (u <= 0.0) u = 0x1.0p-53;
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x = next_gaussian();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = next_unit();
      if (u <= 0.0) u = 0x1.0p-53;
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_beta(double a, double b) {
    double x = next_gamma(a);
    double y = next_gamma(b);
    double s = x + y;
    if (s <= 0.0) return 0.5;
    return x / s;
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fairaudit
