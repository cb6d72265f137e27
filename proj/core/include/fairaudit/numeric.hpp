#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace fairaudit {

// Probabilities are clipped into [kProbEps, 1 - kProbEps] before any logit
// so that scores of exactly 0 or 1 stay finite.
inline constexpr double kProbEps = 1e-7;

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

inline double clip_probability(double p) {
  if (p < kProbEps) return kProbEps;
  if (p > 1.0 - kProbEps) return 1.0 - kProbEps;
  return p;
}

inline double logit(double p) {
  p = clip_probability(p);
  return std::log(p / (1.0 - p));
}

// log(1 + e^x) without overflow.
inline double log1pexp(double x) {
  if (x > 35.0) return x;
  return std::log1p(std::exp(x));
}

// Shortest round-trip decimal form; reloading the text yields the identical
// bit pattern, which keeps serialize/load/serialize byte-stable.
inline std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline std::string format_fixed(double v, int digits) {
  std::array<char, 64> buf;
  int n = std::snprintf(buf.data(), buf.size(), "%.*f", digits, v);
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

}  // namespace fairaudit
