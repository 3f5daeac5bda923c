#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "entangled/analysis.hpp"
#include "entangled/estimators.hpp"
#include "entangled/harness.hpp"
#include "entangled/instances.hpp"
#include "entangled/lowerbound.hpp"
#include "json.hpp"

namespace entangled {

namespace {

SampleSet read_samples(const std::string& path) {
  if (path == "-") return read_samples_csv(std::cin);
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open samples file: " + path);
  }
  return read_samples_csv(in);
}

int run_estimate(const std::string& file, bool auto_init, bool have_mu0,
                 bool have_b, double mu0, double B, long long m,
                 double inner_scale, bool trace) {
  if (auto_init && (have_mu0 || have_b)) {
    throw std::invalid_argument(
        "--auto-init excludes --mu0/--B (pick one initialization)");
  }
  if (!auto_init && (!have_mu0 || !have_b)) {
    throw std::invalid_argument(
        "either pass --auto-init or both --mu0 and --B");
  }
  const SampleSet samples = read_samples(file);
  if (auto_init) {
    const auto init = default_initialization(samples);
    mu0 = init.first;
    B = init.second;
  }
  const EstimateResult result =
      estimate_iterative_truncation(samples, mu0, B, m, inner_scale, trace);

  nlohmann::json doc;
  doc["estimate"] = result.estimate;
  doc["mu0"] = mu0;
  doc["B"] = B;
  doc["schedule"] = {{"B", result.schedule.B},
                     {"K", result.schedule.K},
                     {"T", result.schedule.T},
                     {"inner_scale", result.schedule.inner_scale}};
  if (result.trace.has_value()) {
    nlohmann::json stages = nlohmann::json::array();
    for (const IterationStage& stage : result.trace->stages) {
      stages.push_back(
          {{"delta", stage.delta}, {"iterates", stage.iterates}});
    }
    doc["trace"] = std::move(stages);
  }
  std::cout << doc.dump() << "\n";
  return 0;
}

int run_sweep(const std::string& config_path, bool have_seed,
              std::uint64_t seed, int threads) {
  std::ifstream in(config_path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + config_path);
  }
  SweepConfig config = parse_sweep_config(nlohmann::json::parse(in));
  if (have_seed) config.seed = seed;

  const std::vector<SweepRow> rows = run_error_sweep(config, threads);
  if (config.out.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(config.out);
    if (!out) {
      throw std::invalid_argument("cannot open output file: " + config.out);
    }
    write_sweep_csv(out, rows);
    std::fprintf(stderr, "wrote %zu rows to %s\n", rows.size(),
                 config.out.c_str());
  }
  return 0;
}

int run_lowerbound(int case_id, long long n, long long m, long long trials,
                   double c_sigma, double c_l, std::uint64_t seed, int threads,
                   const std::string& out_path) {
  std::vector<std::string> warnings;
  const TwoPointPrior prior = case_id == 1
                                  ? case1_params(n, m, c_sigma, c_l, &warnings)
                                  : case2_params(n, m, c_sigma, c_l, &warnings);
  for (const std::string& w : warnings) {
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  }
  const SignErrorResult res =
      run_sign_error_experiment(prior, n, trials, seed, threads);

  char row[400];
  std::snprintf(row, sizeof(row),
                "n,m,case,C_sigma,c_L,wrong_rate,bayes_error,L,ci,seed\n"
                "%lld,%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n",
                n, m, case_id, c_sigma, c_l, res.wrong_sign_rate,
                res.bayes_expected_error, prior.L, res.ci_halfwidth,
                static_cast<unsigned long long>(seed));
  if (out_path.empty()) {
    std::cout << row;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      throw std::invalid_argument("cannot open output file: " + out_path);
    }
    out << row;
  }
  std::fprintf(stderr,
               "case %d, n=%lld, m=%lld, %lld trials: wrong-sign rate %.4f "
               "(ci +-%.4f), Bayes risk %.6g with L=%.6g%s\n",
               case_id, n, m, trials, res.wrong_sign_rate, res.ci_halfwidth,
               res.bayes_expected_error, prior.L,
               prior.well_conditioned ? "" : " [prior not well-conditioned]");
  return 0;
}

int run_verify_toolbox(int draws, std::uint64_t seed,
                       const std::string& out_path) {
  const std::vector<ToolboxCheckRow> rows =
      run_toolbox_verification(draws, seed, QuadratureSpec{});
  std::ostringstream csv;
  csv << "kind,params_hash,closed_form,quadrature,abs_diff,pass\n";
  int failures = 0;
  char buf[320];
  for (const ToolboxCheckRow& r : rows) {
    if (!r.pass) ++failures;
    std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%s\n",
                  r.kind.c_str(), r.params_hash.c_str(), r.closed_form,
                  r.quadrature, r.abs_diff, r.pass ? "true" : "false");
    csv << buf;
  }
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) {
      throw std::invalid_argument("cannot open output file: " + out_path);
    }
    out << csv.str();
  }
  std::fprintf(stderr, "toolbox verification: %zu/%zu checks passed\n",
               rows.size() - failures, rows.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"iterative-truncation mean estimation toolkit"};
  app.require_subcommand(1);

  auto* est = app.add_subcommand(
      "estimate", "estimate the common mean of one sample per coordinate");
  std::string est_file = "-";
  est->add_option("file", est_file,
                  "single-column samples CSV, '-' for stdin (default)");
  double mu0 = 0.0, B = 0.0, est_inner_scale = 1.0;
  long long est_m = 0;
  bool auto_init = false, trace = false;
  auto* mu0_opt = est->add_option("--mu0", mu0, "initial center");
  auto* b_opt =
      est->add_option("--B", B, "initial truncation radius (B >= 2|mu0-mu*|)");
  est->add_option("--m", est_m, "number of low-variance coordinates")
      ->required();
  est->add_flag("--auto-init", auto_init,
                "derive mu0 (sample mean) and B (2x sample range) from data");
  est->add_option("--inner-scale", est_inner_scale,
                  "multiplier on the inner iteration count");
  est->add_flag("--trace", trace, "emit every iterate of every stage");
  std::uint64_t est_seed = 0;
  int est_threads = 0;
  est->add_option("--seed", est_seed, "unused; accepted for uniformity");
  est->add_option("--threads", est_threads, "unused; accepted for uniformity");

  auto* sweep = app.add_subcommand(
      "sweep", "Monte Carlo error sweep over an n-grid of synthetic instances");
  std::string config_path;
  sweep->add_option("--config", config_path, "sweep config JSON")->required();
  int sweep_threads = 0;
  sweep->add_option("--threads", sweep_threads, "worker threads (0 = auto)");
  std::uint64_t sweep_seed = 0;
  auto* sweep_seed_opt = sweep->add_option(
      "--seed", sweep_seed, "override the master seed from the config");

  auto* lb = app.add_subcommand(
      "lowerbound", "Bayes wrong-sign experiment on the two-point prior");
  int case_id = 0;
  lb->add_option("--case", case_id, "prior regime: 1 (sparse) or 2 (dense)")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  long long lb_n = 0, lb_m = 0, lb_trials = 2000;
  lb->add_option("--n", lb_n, "number of coordinates")->required();
  lb->add_option("--m", lb_m, "expected signal count (p = m/n)")->required();
  lb->add_option("--trials", lb_trials, "number of trials");
  double c_sigma = 10.0, c_l = 0.1;
  lb->add_option("--c-sigma", c_sigma, "noise-scale constant");
  lb->add_option("--c-l", c_l, "mean-separation constant");
  std::uint64_t lb_seed = 12345;
  int lb_threads = 0;
  std::string lb_out;
  lb->add_option("--seed", lb_seed, "master seed");
  lb->add_option("--threads", lb_threads, "worker threads (0 = auto)");
  lb->add_option("--out", lb_out, "CSV output path (default stdout)");

  auto* verify = app.add_subcommand(
      "verify-toolbox", "check Gaussian-integral closed forms vs quadrature");
  int draws = 200;
  std::uint64_t verify_seed = 12345;
  std::string verify_out;
  int verify_threads = 0;
  verify->add_option("--draws", draws, "parameter draws per integral kind");
  verify->add_option("--seed", verify_seed, "master seed");
  verify->add_option("--out", verify_out, "CSV output path (default stdout)");
  verify->add_option("--threads", verify_threads,
                     "unused; accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (est->parsed()) {
      return run_estimate(est_file, auto_init, mu0_opt->count() > 0,
                          b_opt->count() > 0, mu0, B, est_m, est_inner_scale,
                          trace);
    }
    if (sweep->parsed()) {
      return run_sweep(config_path, sweep_seed_opt->count() > 0, sweep_seed,
                       sweep_threads);
    }
    if (lb->parsed()) {
      return run_lowerbound(case_id, lb_n, lb_m, lb_trials, c_sigma, c_l,
                            lb_seed, lb_threads, lb_out);
    }
    if (verify->parsed()) {
      return run_verify_toolbox(draws, verify_seed, verify_out);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace entangled
