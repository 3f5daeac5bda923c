#pragma once

#include <cstdint>
#include <optional>

#include "entangled/core.hpp"

namespace entangled {

struct EstimateResult {
  double estimate = 0.0;
  std::optional<IterationTrace> trace;  // populated iff tracing was requested
  TruncationSchedule schedule;
};

// One averaging step: mean over i of truncate(x_i, mu - delta, mu + delta).
// Throws std::invalid_argument on empty samples or non-positive/non-finite
// delta.
double iterate_once(const SampleSet& samples, double mu, double delta);

// Iterative truncation estimator. Runs K+1 stages of T+1 averaging steps
// (inner index t = 0..T producing iterate T+1), halving the truncation
// radius between stages, starting from mu0 with initial radius B.
//
// The returned estimate is the final iterate of the last stage; when
// trace_enabled, every iterate of every stage is recorded.
//
// Throws std::invalid_argument for malformed inputs (empty or non-finite
// samples, non-positive B, m outside [1, n]) and std::runtime_error when
// T*(K+1)*n exceeds the step budget (see step_budget()).
EstimateResult estimate_iterative_truncation(const SampleSet& samples,
                                             double mu0, double B, long long m,
                                             double inner_scale = 1.0,
                                             bool trace_enabled = false);

// Arithmetic mean baseline. Throws std::invalid_argument on empty input.
double estimate_sample_mean(const SampleSet& samples);

// Lower-median baseline: sorted element at index floor((n-1)/2), so the
// smaller middle element for even n. Throws std::invalid_argument on empty
// input.
double estimate_median(const SampleSet& samples);

// Cap on total elementary truncations per estimate call, from the
// ENTANGLED_STEP_BUDGET environment variable (read on every call), default
// 10^9. Throws std::invalid_argument if the variable is set but not a
// positive integer.
long long step_budget();

}  // namespace entangled
