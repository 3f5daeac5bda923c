#include "entangled/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace entangled {

double iterate_once(const SampleSet& samples, double mu, double delta) {
  if (samples.values.empty()) {
    throw std::invalid_argument("iterate_once: samples are empty");
  }
  if (!std::isfinite(delta) || delta <= 0.0) {
    throw std::invalid_argument("iterate_once: delta must be positive and finite");
  }
  if (!std::isfinite(mu)) {
    throw std::invalid_argument("iterate_once: mu must be finite");
  }
  const double lo = mu - delta;
  const double hi = mu + delta;
  double sum = 0.0;
  for (double x : samples.values) {
    sum += truncate(x, lo, hi);
  }
  return sum / static_cast<double>(samples.values.size());
}

long long step_budget() {
  const char* env = std::getenv("ENTANGLED_STEP_BUDGET");
  if (env == nullptr || *env == '\0') return 1000000000LL;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  if (end == env || *end != '\0' || v <= 0) {
    throw std::invalid_argument(
        "ENTANGLED_STEP_BUDGET must be a positive integer");
  }
  return v;
}

namespace {

// Truncated-sum kernel over presorted samples: with s sorted ascending and
// prefix[j] the sum of s[0..j), the truncated sum at window [lo, hi] is
// lo*#[s < lo] + (prefix[j] - prefix[i]) + hi*#[s > hi]. Identical to the
// naive per-element loop up to summation order.
struct SortedKernel {
  std::vector<double> sorted;
  std::vector<long double> prefix;

  explicit SortedKernel(const std::vector<double>& values)
      : sorted(values), prefix(values.size() + 1, 0.0L) {
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      prefix[i + 1] = prefix[i] + sorted[i];
    }
  }

  double step(double mu, double delta) const {
    const double lo = mu - delta;
    const double hi = mu + delta;
    const auto first =
        std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin();
    const auto last =
        std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin();
    const long double middle = prefix[last] - prefix[first];
    const long double n = static_cast<long double>(sorted.size());
    const long double sum = static_cast<long double>(lo) * first + middle +
                            static_cast<long double>(hi) *
                                (static_cast<long double>(sorted.size()) - last);
    return static_cast<double>(sum / n);
  }
};

}  // namespace

EstimateResult estimate_iterative_truncation(const SampleSet& samples,
                                             double mu0, double B, long long m,
                                             double inner_scale,
                                             bool trace_enabled) {
  const long long n = samples.n();
  if (n == 0) {
    throw std::invalid_argument("estimate_iterative_truncation: samples empty");
  }
  for (double x : samples.values) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(
          "estimate_iterative_truncation: samples must be finite");
    }
  }
  if (!std::isfinite(mu0)) {
    throw std::invalid_argument(
        "estimate_iterative_truncation: mu0 must be finite");
  }

  EstimateResult result;
  result.schedule = build_schedule(B, n, m, inner_scale);
  const TruncationSchedule& sched = result.schedule;

  const __int128 total_steps = static_cast<__int128>(sched.T) *
                               (static_cast<__int128>(sched.K) + 1) *
                               static_cast<__int128>(n);
  const long long budget = step_budget();
  if (total_steps > static_cast<__int128>(budget)) {
    char msg[200];
    std::snprintf(msg, sizeof(msg),
                  "schedule overflow: T=%lld stages=%d n=%lld needs %.3g "
                  "truncations, budget is %lld (ENTANGLED_STEP_BUDGET)",
                  sched.T, sched.K + 1, n, static_cast<double>(total_steps),
                  budget);
    throw std::runtime_error(msg);
  }

  const SortedKernel kernel(samples.values);
  if (trace_enabled) result.trace.emplace();

  double mu = mu0;
  for (int k = 0; k <= sched.K; ++k) {
    const double delta = sched.delta(k);
    IterationStage stage;
    stage.delta = delta;
    if (trace_enabled) stage.iterates.push_back(mu);
    for (long long t = 0; t <= sched.T; ++t) {
      mu = kernel.step(mu, delta);
      if (trace_enabled) stage.iterates.push_back(mu);
    }
    if (trace_enabled) result.trace->stages.push_back(std::move(stage));
  }
  result.estimate = mu;
  return result;
}

double estimate_sample_mean(const SampleSet& samples) {
  if (samples.values.empty()) {
    throw std::invalid_argument("estimate_sample_mean: samples are empty");
  }
  double sum = 0.0;
  for (double x : samples.values) sum += x;
  return sum / static_cast<double>(samples.values.size());
}

double estimate_median(const SampleSet& samples) {
  if (samples.values.empty()) {
    throw std::invalid_argument("estimate_median: samples are empty");
  }
  std::vector<double> copy = samples.values;
  const std::size_t k = (copy.size() - 1) / 2;
  std::nth_element(copy.begin(), copy.begin() + k, copy.end());
  return copy[k];
}

}  // namespace entangled
