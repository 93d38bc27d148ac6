#include "doctest.h"

#include <cmath>

#include "ganbench/core/rng.hpp"

using ganbench::core::Rng;

TEST_CASE("rng determinism under fixed seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng child streams are stable and distinct") {
  Rng a = Rng::child(7, 0);
  Rng b = Rng::child(7, 0);
  Rng c = Rng::child(7, 1);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  CHECK(Rng::child(7, 0).next_u64() != Rng::child(8, 0).next_u64());
}

TEST_CASE("uniform lives in [0,1)") {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("below(n) is in range and roughly uniform") {
  Rng r(3);
  int counts[7] = {0};
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const uint64_t v = r.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  for (int c : counts) CHECK(std::abs(c - n / 7) < 500);  // ~5 sigma
}

TEST_CASE("normal moments") {
  Rng r(5);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}
