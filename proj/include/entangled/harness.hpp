#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "entangled/instances.hpp"
#include "json.hpp"

namespace entangled {

enum class MRuleKind { fixed, proportional, threshold };

// Maps n to the signal count m: fixed -> c (integral), proportional ->
// ceil(c*n), threshold -> ceil(c*sqrt(n ln n)).
struct MRule {
  MRuleKind kind = MRuleKind::threshold;
  double c = 4.0;

  long long m_for(long long n) const;
};

enum class EstimatorKind { iter_trunc, median, mean };

const char* estimator_name(EstimatorKind kind);
int estimator_index(EstimatorKind kind);  // stable index used in trial seeds

struct SweepConfig {
  std::vector<long long> n_grid;
  MRule m_rule;
  std::vector<EstimatorKind> estimators;
  NoiseConfig noise;
  long long trials = 200;
  std::uint64_t seed = 12345;
  double inner_scale = 1.0;
  std::string out;            // output CSV path; empty means stdout
  double mu_star = 0.0;       // true mean of generated instances
  double sigma_signal = 1.0;  // sigma of the m signal coordinates
  bool timing = true;         // false writes wall_time_ms as 0 so CSV bytes
                              // are reproducible across runs
};

// Strict JSON parse: unknown keys are rejected so config typos fail loudly.
// Required: n_grid, m_rule{kind, c}, estimators, noise{kind, ...}, trials,
// seed. Optional: inner_scale, out, mu_star, sigma_signal, timing.
SweepConfig parse_sweep_config(const nlohmann::json& doc);

struct SweepRow {
  long long n = 0;
  long long m = 0;
  std::string estimator;
  long long trials = 0;
  double mean_abs_err = 0.0;
  double median_abs_err = 0.0;
  double q90_abs_err = 0.0;
  double theory_bound = 0.0;  // sqrt(n ln n)/m
  std::uint64_t seed = 0;     // master seed of the sweep
  double wall_time_ms = 0.0;
};

// Runs trials x (n, estimator) cells of generate -> estimate -> |error|.
// Per-trial seeds derive from (master seed, n, m, estimator index, trial),
// and trial results land in preassigned slots, so the output is identical
// for any thread count (0 = hardware concurrency). A cell whose estimator
// exhausts the step budget gets NaN statistics and the sweep continues.
std::vector<SweepRow> run_error_sweep(const SweepConfig& config,
                                      int threads = 0);

// Header: n,m,estimator,trials,mean_abs_err,median_abs_err,q90_abs_err,
// theory_bound,seed,wall_time_ms. Reals carry 17 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_rows(std::istream& in);

enum class FitVariable { n, m };

// OLS of log(median_abs_err) against log(n or m). Returns (exponent,
// r_squared). Throws std::invalid_argument with fewer than 3 distinct
// x values or non-positive medians.
std::pair<double, double> fit_scaling_exponent(const std::vector<SweepRow>& rows,
                                               FitVariable vary);

// Entry point behind the binary: subcommands estimate, sweep, lowerbound,
// verify-toolbox. Exit codes: 0 success, 1 numerical failure, 2 usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace entangled
