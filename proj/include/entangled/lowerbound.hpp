#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "entangled/core.hpp"
#include "entangled/instances.hpp"

namespace entangled {

enum class SigmaGroup { p, q };

struct LikelihoodReport {
  double log_ratio = 0.0;  // always x_p_part + x_q_part
  double x_p_part = 0.0;
  double x_q_part = 0.0;
  std::pair<long long, long long> per_group_counts{0, 0};  // (|S_p|, |S_q|)
};

struct GroupMoments {
  double e_n = 0.0;   // E[N^j]
  double e_d = 0.0;   // E[D^j]
  double e_nd = 0.0;  // E[N^j D^j]
};

struct MomentReport {
  int t = 1;
  SigmaGroup group = SigmaGroup::q;
  std::map<int, GroupMoments> exact_moments;  // j = 1..2t
  double empirical_Y_mean = 0.0;
  double empirical_Y_second = 0.0;  // central second moment
  double predicted_Y_mean_bound = 0.0;
  double predicted_Y_second_order = 0.0;
};

struct SignErrorResult {
  double wrong_sign_rate = 0.0;
  double bayes_expected_error = 0.0;  // 2L * wrong_sign_rate
  double ci_halfwidth = 0.0;          // 2*sqrt(r(1-r)/trials)
};

// Log-likelihood ratio of mean +L vs -L under the two-group assignment,
// evaluated in log domain: per sample, ln(1+N) - ln(1+D) + beta*x with
// ln N = ln(alpha) - (x-L)^2/(2 sigma_pq^2) and ln D the mirrored form.
// Contributions are bucketed by assignment into x_p_part / x_q_part.
// Throws std::invalid_argument on length mismatch and std::runtime_error if
// a contribution is non-finite.
LikelihoodReport log_likelihood_ratio(const SampleSet& samples,
                                      const std::vector<SigmaGroup>& assignments,
                                      const TwoPointPrior& prior);

// Closed-form moments of N^j, D^j, N^j D^j for a sample drawn from the given
// group with mean true_mean_sign*L. Computed in log domain and exponentiated
// at the end. Throws std::invalid_argument on j < 1 or sign not in {-1, +1}.
GroupMoments exact_group_moments(const TwoPointPrior& prior, SigmaGroup group,
                                 int j, int true_mean_sign);

// Order-(2t-1) expansion of one sample's log-likelihood contribution:
// beta*x + sum_{j=1}^{2t-1} (-1)^{j+1} (N^j - D^j)/j. Throws
// std::runtime_error if a power overflows double range.
double taylor_Y(double x, const TwoPointPrior& prior, int t);

// Bayes sign test: draws `trials` instances, scores a trial wrong when the
// likelihood ratio favors the wrong mean sign (exact ties count 0.5), and
// converts the rate to the Bayes risk 2L*rate. Per-trial seeds are derived
// from `seed`, and the reduction is order-independent, so the result does
// not depend on `threads` (0 means use hardware concurrency).
SignErrorResult run_sign_error_experiment(const TwoPointPrior& prior,
                                          long long n, long long trials,
                                          std::uint64_t seed, int threads = 0);

// Exact moments j = 1..2t plus Monte Carlo moments of taylor_Y over
// x ~ N(+L, sigma_group^2), with the order-level predictions recorded for
// reporting. Throws std::invalid_argument on t < 1 or mc_draws < 10^4.
MomentReport moment_diagnostics(const TwoPointPrior& prior, SigmaGroup group,
                                int t, long long mc_draws, std::uint64_t seed);

}  // namespace entangled
