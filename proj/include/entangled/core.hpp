#pragma once

#include <cstdint>
#include <utility>
#include <vector>

// Domain types for mean estimation with entangled Gaussians (one sample from
// each of n distributions sharing a mean), the truncation map, and the
// schedule arithmetic of the iterative-truncation estimator.
namespace entangled {

// Hidden truth for a synthetic run: common mean and per-sample standard
// deviations, in generation order.
struct GaussianInstance {
  double mu_star = 0.0;
  std::vector<double> sigmas;

  std::size_t n() const noexcept { return sigmas.size(); }

  // True iff the m-th smallest sigma is <= 1 (the subset-of-signals
  // condition). m must be in [1, n].
  bool satisfies_subset_of_signals(std::size_t m) const;
};

// One observation per distribution. seed is the generator seed that produced
// the values, 0 when they came from outside the library.
struct SampleSet {
  std::vector<double> values;
  std::uint64_t seed = 0;

  std::size_t n() const noexcept { return values.size(); }
};

// Control parameters of the iterative-truncation estimator: K+1 stages of
// T+1 averaging steps each, with truncation half-width delta(k) = B / 2^k.
struct TruncationSchedule {
  double B = 1.0;
  int K = 0;
  long long T = 1;
  double inner_scale = 1.0;

  double delta(int k) const;  // B / 2^k, valid for k in [0, K]
};

// Per-stage iterates, mu_0 .. mu_{T+1}; the last iterate of stage k equals
// the first iterate of stage k+1.
struct IterationStage {
  double delta = 0.0;
  std::vector<double> iterates;
};

struct IterationTrace {
  std::vector<IterationStage> stages;
};

// Clamp x to [lo, hi]. Throws std::invalid_argument if lo > hi or any
// argument is non-finite.
double truncate(double x, double lo, double hi);

// K = max(0, floor(log2(B))), T = ceil(inner_scale * 64 * n * ln(n) / m).
// Throws std::invalid_argument on B <= 0, n < 2, m < 1, m > n, or
// inner_scale <= 0.
TruncationSchedule build_schedule(double B, long long n, long long m,
                                  double inner_scale = 1.0);

// (mu0, B) = (sample mean, 2 * (max - min)); B falls back to 1 when the
// diameter is 0 so the schedule is always valid. Throws on empty input.
std::pair<double, double> default_initialization(const SampleSet& samples);

}  // namespace entangled
