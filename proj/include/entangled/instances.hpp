#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "entangled/core.hpp"
#include "json.hpp"

namespace entangled {

// Conditioning constants for the two-point prior. The well_conditioned flag
// below checks the prior against these; all are overridable.
struct PriorConstants {
  double C_q = 10.0;
  double C_sigma = 10.0;
  double c_L = 0.1;
  double c_alpha = 0.5;
};

// Mixture prior with two variance levels sigma_p < sigma_q and mean +-L.
// Derived quantities are frozen at construction; sigma_pq satisfies
// 1/sigma_pq^2 = 1/sigma_p^2 - 1/sigma_q^2 and is real because
// sigma_q > sigma_p is enforced.
struct TwoPointPrior {
  double p = 0.0;
  double q = 1.0;
  double sigma_p = 1.0;
  double sigma_q = 2.0;
  double L = 0.0;

  double alpha = 0.0;    // (p/sigma_p) / (q/sigma_q)
  double beta = 0.0;     // 2L / sigma_q^2
  double gamma = 0.0;    // sigma_p / sigma_q
  double sigma_pq = 0.0;

  PriorConstants constants;
  bool well_conditioned = false;
};

// Builds a prior from primaries and evaluates the conditioning checks:
// q > C_q*p, sigma_q > C_sigma*sigma_p, L < c_L*sigma_q, alpha < c_alpha.
// p may sit at the endpoints 0 or 1 (degenerate single-group priors used by
// sampling checks; alpha becomes 0 or +inf there). L = 0 gives the symmetric
// prior whose likelihood ratio is identically zero.
// Throws std::invalid_argument on sigma_q <= sigma_p or out-of-range fields.
TwoPointPrior make_two_point_prior(double p, double sigma_p, double sigma_q,
                                   double L,
                                   const PriorConstants& constants = {});

enum class NoiseKind { constant, geometric_ladder, pareto_tail, custom_list };

// Configuration for the n-m high-variance coordinates. Every generated sigma
// must exceed 1; configs that cannot guarantee that are rejected.
//   constant:         all entries = level
//   geometric_ladder: entries cycle level * base^(j mod rungs)
//   pareto_tail:      entries level * u^(-1/alpha_tail), u uniform in (0,1)
//   custom_list:      entries cycle through values
struct NoiseConfig {
  NoiseKind kind = NoiseKind::constant;
  double level = 1e6;
  double base = 2.0;
  int rungs = 8;
  double alpha_tail = 1.5;
  std::vector<double> values;
};

// Draws an instance with exactly m coordinates at sigma_signal (<= 1) and
// n-m noise coordinates per the config, positions shuffled, then samples
// x_i ~ N(mu_star, sigma_i^2), all from one seeded stream.
// Throws std::invalid_argument on m out of [1, n], sigma_signal outside
// (0, 1], or a noise config that produces a sigma <= 1.
std::pair<GaussianInstance, SampleSet> generate_subset_of_signals(
    long long n, long long m, double mu_star, double sigma_signal,
    const NoiseConfig& noise, std::uint64_t seed);

// Sparse-regime prior: p = m/n, sigma_p = 1, sigma_q = C_sigma/(p^2 n),
// L = c_L/(p^2 n^(3/2)). Outside the regime guard (2 ln n <= m <= 2 n^(1/4))
// a warning is appended to *warnings (or printed to stderr when null).
// Throws std::invalid_argument if the resulting sigma_q <= sigma_p.
TwoPointPrior case1_params(long long n, long long m, double C_sigma = 10.0,
                           double c_L = 0.1,
                           std::vector<std::string>* warnings = nullptr);

// Dense-regime prior: p = m/n, sigma_p = 1, sigma_q = C_sigma/p^(2/3),
// L = c_L/(p^(2/3) sqrt(n)). Guard: m >= n^(1/4), warn below.
TwoPointPrior case2_params(long long n, long long m, double C_sigma = 10.0,
                           double c_L = 0.1,
                           std::vector<std::string>* warnings = nullptr);

struct PriorSample {
  int true_sign = +1;  // the drawn sign of the common mean, +1 or -1
  GaussianInstance instance;
  SampleSet samples;
};

// Draws sigma_i = sigma_p w.p. p else sigma_q (n Bernoulli draws), then one
// fair coin for the mean sign, then the n samples, all from one seeded
// stream. The realized signal count is recoverable from instance.sigmas.
PriorSample sample_prior_instance(const TwoPointPrior& prior, long long n,
                                  std::uint64_t seed);

// JSON document {"mu_star": ..., "sigmas": [...], "seed": ...}.
nlohmann::json instance_to_json(const GaussianInstance& instance,
                                std::uint64_t seed);
std::pair<GaussianInstance, std::uint64_t> instance_from_json(
    const nlohmann::json& doc);

// Single-column CSV, one sample per line, no header.
void write_samples_csv(std::ostream& out, const SampleSet& samples);
SampleSet read_samples_csv(std::istream& in);

}  // namespace entangled
