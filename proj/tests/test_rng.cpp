#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "fairaudit/rng.hpp"

using namespace fairaudit;

TEST_CASE("counter rng is a pure function of its key") {
  CounterRng a(42, Stream::Bootstrap, 7, 0);
  CounterRng b(42, Stream::Bootstrap, 7, 0);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different key components give different streams") {
  CounterRng base(42, Stream::Bootstrap, 7, 0);
  CounterRng seed(43, Stream::Bootstrap, 7, 0);
  CounterRng stream(42, Stream::ScenarioLatent, 7, 0);
  CounterRng ctr(42, Stream::Bootstrap, 8, 0);
  auto x = base.next_u64();
  CHECK(x != seed.next_u64());
  CHECK(x != stream.next_u64());
  CHECK(x != ctr.next_u64());
}

TEST_CASE("next_unit stays in [0,1) and fills the range") {
  CounterRng rng(1, Stream::TestHarness, 0, 0);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("next_below is unbiased across a non-power-of-two range") {
  CounterRng rng(2, Stream::TestHarness, 0, 0);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) counts[rng.next_below(7)]++;
  for (int c : counts) {
    CHECK(c > 9500);  // expected 10000, 5 sigma is about 480
    CHECK(c < 10500);
  }
}

TEST_CASE("next_below covers every residue") {
  CounterRng rng(3, Stream::TestHarness, 0, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(rng.next_below(5));
  CHECK(seen.size() == 5);
}

TEST_CASE("gaussian moments") {
  CounterRng rng(4, Stream::TestHarness, 0, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double g = rng.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gamma and beta moments") {
  CounterRng rng(5, Stream::TestHarness, 0, 0);
  const int n = 50000;
  double gsum = 0.0;
  for (int i = 0; i < n; ++i) gsum += rng.next_gamma(2.5);
  CHECK(std::abs(gsum / n - 2.5) < 0.05);

  // Beta(2, 6): mean 0.25, var 0.25*0.75/9.
  double bsum = 0.0, bsum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double b = rng.next_beta(2.0, 6.0);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
    bsum += b;
    bsum2 += b * b;
  }
  double mean = bsum / n;
  CHECK(std::abs(mean - 0.25) < 0.01);
  CHECK(std::abs((bsum2 / n - mean * mean) - 0.25 * 0.75 / 9.0) < 0.005);
}

TEST_CASE("shape-below-one gamma stays positive and has the right mean") {
  CounterRng rng(6, Stream::TestHarness, 0, 0);
  const int n = 50000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.next_gamma(0.4);
    CHECK(g >= 0.0);
    sum += g;
  }
  CHECK(std::abs(sum / n - 0.4) < 0.02);
}
