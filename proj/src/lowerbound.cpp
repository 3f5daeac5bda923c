#include "entangled/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "entangled/analysis.hpp"
#include "entangled/rng.hpp"

namespace entangled {

namespace {

struct LogKernels {
  double log_alpha;
  double inv_two_sigma_pq_sq;

  explicit LogKernels(const TwoPointPrior& prior)
      : log_alpha(std::log(prior.alpha)),
        inv_two_sigma_pq_sq(1.0 /
                            (2.0 * prior.sigma_pq * prior.sigma_pq)) {}

  double ln_n(double x, double L) const {
    return log_alpha - (x - L) * (x - L) * inv_two_sigma_pq_sq;
  }
  double ln_d(double x, double L) const {
    return log_alpha - (x + L) * (x + L) * inv_two_sigma_pq_sq;
  }
};

}  // namespace

LikelihoodReport log_likelihood_ratio(const SampleSet& samples,
                                      const std::vector<SigmaGroup>& assignments,
                                      const TwoPointPrior& prior) {
  if (assignments.size() != samples.values.size()) {
    throw std::invalid_argument(
        "log_likelihood_ratio: assignments length must match samples");
  }
  const LogKernels k(prior);
  LikelihoodReport report;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    const double x = samples.values[i];
    const double contribution =
        softplus(k.ln_n(x, prior.L)) - softplus(k.ln_d(x, prior.L)) +
        prior.beta * x;
    if (!std::isfinite(contribution)) {
      throw std::runtime_error(
          "log_likelihood_ratio: non-finite contribution (check sigma_pq)");
    }
    if (assignments[i] == SigmaGroup::p) {
      report.x_p_part += contribution;
      ++report.per_group_counts.first;
    } else {
      report.x_q_part += contribution;
      ++report.per_group_counts.second;
    }
  }
  report.log_ratio = report.x_p_part + report.x_q_part;
  return report;
}

GroupMoments exact_group_moments(const TwoPointPrior& prior, SigmaGroup group,
                                 int j, int true_mean_sign) {
  if (j < 1) {
    throw std::invalid_argument("exact_group_moments: j must be >= 1");
  }
  if (true_mean_sign != 1 && true_mean_sign != -1) {
    throw std::invalid_argument(
        "exact_group_moments: true_mean_sign must be +1 or -1");
  }
  const double sg = group == SigmaGroup::p ? prior.sigma_p : prior.sigma_q;
  const double spq2 = prior.sigma_pq * prior.sigma_pq;
  const double jd = static_cast<double>(j);
  const double L = prior.L;
  const double log_alpha = std::log(prior.alpha);

  // ln E[matched^j] carries no mean-mismatch factor; the mismatched factor
  // decays by exp(-2 j L^2 / (sigma_pq^2 + j sigma_g^2)).
  const double log_base = jd * log_alpha + std::log(prior.sigma_pq) -
                          0.5 * std::log(spq2 + jd * sg * sg);
  const double mismatch = -2.0 * jd * L * L / (spq2 + jd * sg * sg);

  // ln E[N^j D^j]: the exponent is written with sigma_pq^2 factored out so
  // no fourth power of sigma_pq is ever formed.
  const double log_cross =
      2.0 * jd * log_alpha + std::log(prior.sigma_pq) -
      0.5 * std::log(spq2 + 2.0 * jd * sg * sg) -
      (2.0 * jd * L * L / spq2) * (spq2 + jd * sg * sg) /
          (spq2 + 2.0 * jd * sg * sg);

  GroupMoments out;
  const double matched = std::exp(log_base);
  const double mismatched = std::exp(log_base + mismatch);
  out.e_n = true_mean_sign == 1 ? matched : mismatched;
  out.e_d = true_mean_sign == 1 ? mismatched : matched;
  out.e_nd = std::exp(log_cross);
  return out;
}

double taylor_Y(double x, const TwoPointPrior& prior, int t) {
  if (t < 1) {
    throw std::invalid_argument("taylor_Y: t must be >= 1");
  }
  const LogKernels k(prior);
  const double ln_n = k.ln_n(x, prior.L);
  const double ln_d = k.ln_d(x, prior.L);
  double sum = prior.beta * x;
  for (int j = 1; j <= 2 * t - 1; ++j) {
    const double jd = static_cast<double>(j);
    const double hi = std::max(ln_n, ln_d);
    if (jd * hi > 700.0) {
      throw std::runtime_error("taylor_Y: power term overflows double range");
    }
    // N^j - D^j = +-exp(j*max) * expm1(j*(min - max)), keeping the
    // subtraction in expm1 where it is accurate.
    const double magnitude =
        -std::exp(jd * hi) * std::expm1(jd * (std::min(ln_n, ln_d) - hi));
    const double diff = ln_n >= ln_d ? magnitude : -magnitude;
    const double sign = (j % 2 == 1) ? 1.0 : -1.0;
    sum += sign * diff / jd;
  }
  return sum;
}

namespace {

double score_one_trial(const TwoPointPrior& prior, long long n,
                       std::uint64_t trial_seed) {
  const PriorSample ps = sample_prior_instance(prior, n, trial_seed);
  std::vector<SigmaGroup> assignments;
  assignments.reserve(ps.instance.sigmas.size());
  for (double s : ps.instance.sigmas) {
    assignments.push_back(s == prior.sigma_p ? SigmaGroup::p : SigmaGroup::q);
  }
  const LikelihoodReport report =
      log_likelihood_ratio(ps.samples, assignments, prior);
  if (report.log_ratio == 0.0) return 0.5;
  const int called_sign = report.log_ratio > 0.0 ? +1 : -1;
  return called_sign == ps.true_sign ? 0.0 : 1.0;
}

}  // namespace

SignErrorResult run_sign_error_experiment(const TwoPointPrior& prior,
                                          long long n, long long trials,
                                          std::uint64_t seed, int threads) {
  if (n < 1) {
    throw std::invalid_argument("run_sign_error_experiment: n must be >= 1");
  }
  if (trials < 1) {
    throw std::invalid_argument(
        "run_sign_error_experiment: trials must be >= 1");
  }
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(
      std::min<long long>(workers, trials));

  // Per-trial scores land in slots and are summed in trial order; scores are
  // multiples of 0.5, so the sum is exact and worker count cannot matter.
  std::vector<double> scores(static_cast<std::size_t>(trials), 0.0);
  auto run_range = [&](long long lo, long long hi) {
    for (long long trial = lo; trial < hi; ++trial) {
      scores[static_cast<std::size_t>(trial)] = score_one_trial(
          prior, n, derive_seed(seed, static_cast<std::uint64_t>(trial)));
    }
  };
  if (workers == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long long chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long lo = static_cast<long long>(w) * chunk;
      const long long hi = std::min(trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  double wrong = 0.0;
  for (double s : scores) wrong += s;
  SignErrorResult out;
  out.wrong_sign_rate = wrong / static_cast<double>(trials);
  out.bayes_expected_error = 2.0 * prior.L * out.wrong_sign_rate;
  out.ci_halfwidth = 2.0 * std::sqrt(out.wrong_sign_rate *
                                     (1.0 - out.wrong_sign_rate) /
                                     static_cast<double>(trials));
  return out;
}

MomentReport moment_diagnostics(const TwoPointPrior& prior, SigmaGroup group,
                                int t, long long mc_draws, std::uint64_t seed) {
  if (t < 1) {
    throw std::invalid_argument("moment_diagnostics: t must be >= 1");
  }
  if (mc_draws < 10000) {
    throw std::invalid_argument("moment_diagnostics: mc_draws must be >= 10^4");
  }
  MomentReport report;
  report.t = t;
  report.group = group;
  for (int j = 1; j <= 2 * t; ++j) {
    report.exact_moments[j] = exact_group_moments(prior, group, j, +1);
  }

  const double sg = group == SigmaGroup::p ? prior.sigma_p : prior.sigma_q;
  SplitMix64 rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (long long i = 0; i < mc_draws; ++i) {
    const double x = prior.L + sg * rng.normal();
    const double y = taylor_Y(x, prior, t);
    const double delta = y - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (y - mean);
  }
  report.empirical_Y_mean = mean;
  report.empirical_Y_second = m2 / static_cast<double>(mc_draws);

  const double L2 = prior.L * prior.L;
  const double sq2 = prior.sigma_q * prior.sigma_q;
  const double small = std::min(1.0, L2 / (prior.sigma_p * prior.sigma_p));
  if (group == SigmaGroup::q) {
    report.predicted_Y_mean_bound = L2 / sq2;
    report.predicted_Y_second_order =
        (prior.p * prior.p / prior.sigma_p) /
            (prior.q * prior.q / prior.sigma_q) * small +
        L2 / sq2;
  } else {
    report.predicted_Y_mean_bound = L2 / sq2 + prior.alpha * small;
    report.predicted_Y_second_order =
        L2 * prior.sigma_p * prior.sigma_p / (sq2 * sq2) +
        L2 * L2 / (sq2 * sq2) + prior.alpha * prior.alpha * small +
        prior.alpha * L2 / sq2;
  }
  return report;
}

}  // namespace entangled
