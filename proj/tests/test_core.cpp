#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "entangled/core.hpp"
#include "entangled/rng.hpp"

using namespace entangled;

TEST_CASE("truncate clamps into the window") {
  CHECK(truncate(0.5, 0.0, 1.0) == 0.5);
  CHECK(truncate(-3.0, 0.0, 1.0) == 0.0);
  CHECK(truncate(7.0, 0.0, 1.0) == 1.0);
  CHECK(truncate(2.0, 2.0, 2.0) == 2.0);
  CHECK(truncate(-5.0, -4.0, -1.0) == -4.0);
}

TEST_CASE("truncate rejects bad windows and non-finite input") {
  CHECK_THROWS_AS(truncate(0.0, 1.0, -1.0), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(truncate(inf, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate(nan, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate(0.0, -inf, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate(0.0, 0.0, nan), std::invalid_argument);
}

TEST_CASE("truncate is idempotent, monotone, and 1-Lipschitz") {
  SplitMix64 rng(7001);
  for (int i = 0; i < 1000; ++i) {
    const double lo = -5.0 + 10.0 * rng.uniform01();
    const double hi = lo + 10.0 * rng.uniform01();
    const double x = -20.0 + 40.0 * rng.uniform01();
    const double y = -20.0 + 40.0 * rng.uniform01();
    const double tx = truncate(x, lo, hi);
    const double ty = truncate(y, lo, hi);
    CHECK(truncate(tx, lo, hi) == tx);
    if (x <= y) CHECK(tx <= ty);
    CHECK(std::abs(tx - ty) <= std::abs(x - y) + 1e-15);
    // Shifting the window moves the output by at most the shift.
    const double s = -3.0 + 6.0 * rng.uniform01();
    CHECK(std::abs(truncate(x, lo + s, hi + s) - tx) <= std::abs(s) + 1e-15);
  }
}

TEST_CASE("schedule: stage count and inner iteration count") {
  const TruncationSchedule s1 = build_schedule(8.0, 100, 100);
  CHECK(s1.K == 3);
  CHECK(s1.T == 295);
  CHECK(s1.B == 8.0);

  const TruncationSchedule s2 = build_schedule(1.0, 1000, 50);
  CHECK(s2.K == 0);
  CHECK(s2.T == 8842);

  const TruncationSchedule s3 = build_schedule(4.0, 4096, 4096);
  CHECK(s3.K == 2);
  CHECK(s3.T == 533);
}

TEST_CASE("schedule: inner_scale multiplies the iteration count") {
  CHECK(build_schedule(8.0, 100, 100, 2.0).T == 590);
  CHECK(build_schedule(8.0, 100, 100, 0.1).T == 30);
}

TEST_CASE("schedule: stage count clamps at zero for B < 1") {
  CHECK(build_schedule(0.5, 100, 10).K == 0);
  CHECK(build_schedule(0.5, 100, 10).delta(0) == 0.5);
}

TEST_CASE("schedule: final radius lies in [1, 2) whenever B >= 1") {
  for (double B : {1.0, 1.5, 2.0, 3.7, 8.0, 1e6, 1.5e7}) {
    const TruncationSchedule s = build_schedule(B, 64, 8);
    const double last = s.delta(s.K);
    CHECK(last >= 1.0);
    CHECK(last < 2.0);
  }
}

TEST_CASE("schedule: radii halve per stage") {
  const TruncationSchedule s = build_schedule(8.0, 100, 100);
  CHECK(s.delta(0) == 8.0);
  CHECK(s.delta(1) == 4.0);
  CHECK(s.delta(2) == 2.0);
  CHECK(s.delta(3) == 1.0);
}

TEST_CASE("schedule: argument validation") {
  CHECK_THROWS_AS(build_schedule(0.0, 100, 10), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(-1.0, 100, 10), std::invalid_argument);
  CHECK_THROWS_AS(
      build_schedule(std::numeric_limits<double>::infinity(), 100, 10),
      std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(1.0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(1.0, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(1.0, 100, 101), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(1.0, 100, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(1.0, 100, 10, -2.0), std::invalid_argument);
}

TEST_CASE("default initialization: center and radius from the data") {
  SampleSet flat;
  flat.values = {3.0, 3.0, 3.0};
  const auto [mu_flat, b_flat] = default_initialization(flat);
  CHECK(mu_flat == 3.0);
  CHECK(b_flat == 1.0);  // zero diameter falls back to radius 1

  SampleSet pair_set;
  pair_set.values = {0.0, 10.0};
  const auto [mu_pair, b_pair] = default_initialization(pair_set);
  CHECK(mu_pair == 5.0);
  CHECK(b_pair == 20.0);

  SampleSet mixed;
  mixed.values = {-1.0, 0.0, 4.0};
  const auto [mu_mixed, b_mixed] = default_initialization(mixed);
  CHECK(mu_mixed == 1.0);
  CHECK(b_mixed == 10.0);
}

TEST_CASE("default initialization rejects empty input") {
  SampleSet empty;
  CHECK_THROWS_AS(default_initialization(empty), std::invalid_argument);
}

TEST_CASE("subset-of-signals predicate uses the m-th smallest sigma") {
  GaussianInstance inst;
  inst.sigmas = {1.0, 2.0, 0.5};
  CHECK(inst.satisfies_subset_of_signals(1));
  CHECK(inst.satisfies_subset_of_signals(2));   // sigma_(2) = 1 <= 1
  CHECK(!inst.satisfies_subset_of_signals(3));  // sigma_(3) = 2 > 1
  CHECK_THROWS_AS(inst.satisfies_subset_of_signals(0), std::invalid_argument);
  CHECK_THROWS_AS(inst.satisfies_subset_of_signals(4), std::invalid_argument);
}
