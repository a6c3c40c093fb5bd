#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "baryflow/rng.hpp"

using baryflow::Rng;

// Reference sequences come from an independent implementation of
// splitmix64 seeding + xoshiro256++, frozen here.
TEST_CASE("raw stream matches the reference sequence") {
  Rng r(42);
  const std::uint64_t expected[] = {15021278609987233951ull, 5881210131331364753ull,
                                    18149643915985481100ull, 12933668939759105464ull,
                                    14637574242682825331ull};
  for (std::uint64_t e : expected) CHECK(r.next_u64() == e);

  Rng z(0);
  CHECK(z.next_u64() == 5987356902031041503ull);
  CHECK(z.next_u64() == 7051070477665621255ull);
  CHECK(z.next_u64() == 6633766593972829180ull);
}

TEST_CASE("doubles are the top 53 bits over 2^53") {
  Rng r(42);
  CHECK(r.next_double() == doctest::Approx(0.8143051451229099).epsilon(1e-15));
  CHECK(r.next_double() == doctest::Approx(0.3188210400616611).epsilon(1e-15));
  CHECK(r.next_double() == doctest::Approx(0.9838941681774888).epsilon(1e-15));
  CHECK(r.next_double() == doctest::Approx(0.7011355981347556).epsilon(1e-15));
}

TEST_CASE("next_double stays in [0,1) and next_open in (0,1]") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    const double o = r.next_open();
    CHECK(o > 0.0);
    CHECK(o <= 1.0);
  }
}

TEST_CASE("substreams are reproducible and leave the parent untouched") {
  Rng parent(42);
  Rng a = parent.substream("layer/0");
  CHECK(a.next_u64() == 1702636695867357330ull);
  CHECK(a.next_u64() == 1224269464756837543ull);
  CHECK(a.next_u64() == 782886573877113627ull);

  Rng b = parent.substream("layer/1");
  CHECK(b.next_u64() == 14021542991998292268ull);
  CHECK(b.next_u64() == 8534147187064187264ull);

  // Deriving children does not advance the parent stream.
  CHECK(parent.next_u64() == 15021278609987233951ull);

  // Same label twice gives the same stream.
  Rng c = Rng(42).substream("layer/0");
  CHECK(c.next_u64() == 1702636695867357330ull);
}

TEST_CASE("distinct labels give distinct streams") {
  Rng parent(1);
  Rng a = parent.substream("frame");
  Rng b = parent.substream("subsample");
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("box-muller first pair is frozen") {
  Rng r(42);
  CHECK(r.normal() == doctest::Approx(-0.268607369462095).epsilon(1e-13));
  CHECK(r.normal() == doctest::Approx(0.5819710518628828).epsilon(1e-13));
}

TEST_CASE("normal moments look standard") {
  Rng r(2024);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
    s3 += x * x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(s3 / n) < 0.05);
}

TEST_CASE("next_int is in range and roughly uniform") {
  Rng r(5);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const int v = r.next_int(10);
    REQUIRE(v >= 0);
    REQUIRE(v < 10);
    ++counts[v];
  }
  for (int c : counts) CHECK(c == doctest::Approx(n / 10.0).epsilon(0.05));
  CHECK_THROWS(r.next_int(0));
  CHECK_THROWS(r.next_int(-3));
}

TEST_CASE("sampling without replacement gives distinct valid indices") {
  Rng r(9);
  const auto idx = r.sample_without_replacement(50, 20);
  REQUIRE(idx.size() == 20);
  std::set<int> seen(idx.begin(), idx.end());
  CHECK(seen.size() == 20);
  for (int i : idx) {
    CHECK(i >= 0);
    CHECK(i < 50);
  }
  const auto all = r.sample_without_replacement(5, 5);
  CHECK(std::set<int>(all.begin(), all.end()).size() == 5);
  CHECK_THROWS(r.sample_without_replacement(3, 4));
}
