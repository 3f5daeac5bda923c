#include "entangled/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entangled {

bool GaussianInstance::satisfies_subset_of_signals(std::size_t m) const {
  if (m < 1 || m > sigmas.size()) {
    throw std::invalid_argument("subset-of-signals check: m must be in [1, n]");
  }
  std::vector<double> sorted(sigmas);
  std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end());
  return sorted[m - 1] <= 1.0;
}

double TruncationSchedule::delta(int k) const {
  return B / std::exp2(static_cast<double>(k));
}

double truncate(double x, double lo, double hi) {
  if (!std::isfinite(x) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("truncate: arguments must be finite");
  }
  if (lo > hi) {
    throw std::invalid_argument("truncate: interval is empty (lo > hi)");
  }
  return std::min(std::max(x, lo), hi);
}

TruncationSchedule build_schedule(double B, long long n, long long m,
                                  double inner_scale) {
  if (!std::isfinite(B) || B <= 0.0) {
    throw std::invalid_argument("build_schedule: B must be positive and finite");
  }
  if (n < 2) {
    throw std::invalid_argument("build_schedule: n must be at least 2");
  }
  if (m < 1) {
    throw std::invalid_argument("build_schedule: m must be at least 1");
  }
  if (m > n) {
    throw std::invalid_argument("build_schedule: m must not exceed n");
  }
  if (!std::isfinite(inner_scale) || inner_scale <= 0.0) {
    throw std::invalid_argument(
        "build_schedule: inner_scale must be positive and finite");
  }
  TruncationSchedule s;
  s.B = B;
  s.K = std::max(0, static_cast<int>(std::floor(std::log2(B))));
  const double nd = static_cast<double>(n);
  const double steps = inner_scale * 64.0 * nd * std::log(nd) / static_cast<double>(m);
  s.T = static_cast<long long>(std::ceil(steps));
  s.inner_scale = inner_scale;
  return s;
}

std::pair<double, double> default_initialization(const SampleSet& samples) {
  if (samples.values.empty()) {
    throw std::invalid_argument("default_initialization: no samples");
  }
  double sum = 0.0;
  double lo = samples.values.front();
  double hi = samples.values.front();
  for (double x : samples.values) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double mu0 = sum / static_cast<double>(samples.values.size());
  double B = 2.0 * (hi - lo);
  if (B == 0.0) B = 1.0;  // all samples coincide; any positive width works
  return {mu0, B};
}

}  // namespace entangled
