#include "entangled/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "entangled/estimators.hpp"
#include "entangled/rng.hpp"

namespace entangled {

long long MRule::m_for(long long n) const {
  const double nd = static_cast<double>(n);
  switch (kind) {
    case MRuleKind::fixed:
      return static_cast<long long>(c);
    case MRuleKind::proportional:
      return static_cast<long long>(std::ceil(c * nd));
    case MRuleKind::threshold:
      return static_cast<long long>(std::ceil(c * std::sqrt(nd * std::log(nd))));
  }
  throw std::invalid_argument("m rule: unknown kind");
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::iter_trunc: return "iter_trunc";
    case EstimatorKind::median: return "median";
    case EstimatorKind::mean: return "mean";
  }
  return "unknown";
}

int estimator_index(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::iter_trunc: return 0;
    case EstimatorKind::median: return 1;
    case EstimatorKind::mean: return 2;
  }
  return -1;
}

namespace {

void require_keys(const nlohmann::json& doc, const char* what,
                  const std::vector<std::string>& required,
                  const std::vector<std::string>& optional) {
  if (!doc.is_object()) {
    throw std::invalid_argument(std::string(what) + " must be a JSON object");
  }
  for (const auto& key : required) {
    if (!doc.contains(key)) {
      throw std::invalid_argument(std::string(what) + " missing key: " + key);
    }
  }
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end()) {
      throw std::invalid_argument(std::string(what) + " has unknown key: " + key);
    }
  }
}

double json_number(const nlohmann::json& v, const char* what) {
  if (!v.is_number()) {
    throw std::invalid_argument(std::string(what) + " must be a number");
  }
  return v.get<double>();
}

std::uint64_t json_seed(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const long long s = v.get<long long>();
    if (s < 0) throw std::invalid_argument("seed must be non-negative");
    return static_cast<std::uint64_t>(s);
  }
  throw std::invalid_argument("seed must be an integer");
}

NoiseConfig parse_noise(const nlohmann::json& doc) {
  require_keys(doc, "noise config", {"kind"},
               {"level", "base", "rungs", "alpha_tail", "values"});
  NoiseConfig noise;
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "constant") {
    noise.kind = NoiseKind::constant;
  } else if (kind == "geometric_ladder") {
    noise.kind = NoiseKind::geometric_ladder;
  } else if (kind == "pareto_tail") {
    noise.kind = NoiseKind::pareto_tail;
  } else if (kind == "custom_list") {
    noise.kind = NoiseKind::custom_list;
  } else {
    throw std::invalid_argument("noise config: unknown kind: " + kind);
  }
  if (doc.contains("level")) noise.level = json_number(doc.at("level"), "level");
  if (doc.contains("base")) noise.base = json_number(doc.at("base"), "base");
  if (doc.contains("rungs")) noise.rungs = doc.at("rungs").get<int>();
  if (doc.contains("alpha_tail")) {
    noise.alpha_tail = json_number(doc.at("alpha_tail"), "alpha_tail");
  }
  if (doc.contains("values")) {
    noise.values = doc.at("values").get<std::vector<double>>();
  }
  return noise;
}

}  // namespace

SweepConfig parse_sweep_config(const nlohmann::json& doc) {
  require_keys(doc, "sweep config",
               {"n_grid", "m_rule", "estimators", "noise", "trials", "seed"},
               {"inner_scale", "out", "mu_star", "sigma_signal", "timing"});
  SweepConfig config;

  config.n_grid = doc.at("n_grid").get<std::vector<long long>>();
  if (config.n_grid.empty()) {
    throw std::invalid_argument("sweep config: n_grid is empty");
  }
  for (long long n : config.n_grid) {
    if (n < 2) throw std::invalid_argument("sweep config: every n must be >= 2");
  }

  const nlohmann::json& rule = doc.at("m_rule");
  require_keys(rule, "m_rule", {"kind", "c"}, {});
  const std::string rule_kind = rule.at("kind").get<std::string>();
  if (rule_kind == "fixed") {
    config.m_rule.kind = MRuleKind::fixed;
  } else if (rule_kind == "proportional") {
    config.m_rule.kind = MRuleKind::proportional;
  } else if (rule_kind == "threshold") {
    config.m_rule.kind = MRuleKind::threshold;
  } else {
    throw std::invalid_argument("m_rule: unknown kind: " + rule_kind);
  }
  config.m_rule.c = json_number(rule.at("c"), "m_rule.c");
  if (!std::isfinite(config.m_rule.c) || config.m_rule.c <= 0.0) {
    throw std::invalid_argument("m_rule: c must be positive");
  }
  if (config.m_rule.kind == MRuleKind::fixed &&
      config.m_rule.c != std::floor(config.m_rule.c)) {
    throw std::invalid_argument("m_rule: fixed rule needs an integral c");
  }

  const auto names = doc.at("estimators").get<std::vector<std::string>>();
  if (names.empty()) {
    throw std::invalid_argument("sweep config: estimators list is empty");
  }
  for (const std::string& name : names) {
    if (name == "iter_trunc") {
      config.estimators.push_back(EstimatorKind::iter_trunc);
    } else if (name == "median") {
      config.estimators.push_back(EstimatorKind::median);
    } else if (name == "mean") {
      config.estimators.push_back(EstimatorKind::mean);
    } else {
      throw std::invalid_argument("sweep config: unknown estimator: " + name);
    }
  }

  config.noise = parse_noise(doc.at("noise"));
  config.trials = doc.at("trials").get<long long>();
  if (config.trials < 1) {
    throw std::invalid_argument("sweep config: trials must be >= 1");
  }
  config.seed = json_seed(doc.at("seed"));
  if (doc.contains("inner_scale")) {
    config.inner_scale = json_number(doc.at("inner_scale"), "inner_scale");
    if (!std::isfinite(config.inner_scale) || config.inner_scale <= 0.0) {
      throw std::invalid_argument("sweep config: inner_scale must be positive");
    }
  }
  if (doc.contains("out")) config.out = doc.at("out").get<std::string>();
  if (doc.contains("mu_star")) {
    config.mu_star = json_number(doc.at("mu_star"), "mu_star");
  }
  if (doc.contains("sigma_signal")) {
    config.sigma_signal = json_number(doc.at("sigma_signal"), "sigma_signal");
  }
  if (doc.contains("timing")) config.timing = doc.at("timing").get<bool>();
  return config;
}

namespace {

struct Cell {
  long long n = 0;
  long long m = 0;
  EstimatorKind estimator = EstimatorKind::iter_trunc;
};

struct TrialOutcome {
  double abs_err = 0.0;
  double ms = 0.0;
  bool failed = false;        // step budget exhausted
  bool init_violation = false;  // default init had B < 2|mu0 - mu*|
};

TrialOutcome run_trial(const SweepConfig& config, const Cell& cell,
                       std::uint64_t trial_seed) {
  TrialOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const auto [instance, samples] = generate_subset_of_signals(
      cell.n, cell.m, config.mu_star, config.sigma_signal, config.noise,
      trial_seed);
  double estimate = 0.0;
  try {
    switch (cell.estimator) {
      case EstimatorKind::iter_trunc: {
        const auto [mu0, B] = default_initialization(samples);
        out.init_violation = B < 2.0 * std::abs(mu0 - instance.mu_star);
        estimate = estimate_iterative_truncation(samples, mu0, B, cell.m,
                                                 config.inner_scale, false)
                       .estimate;
        break;
      }
      case EstimatorKind::median:
        estimate = estimate_median(samples);
        break;
      case EstimatorKind::mean:
        estimate = estimate_sample_mean(samples);
        break;
    }
    out.abs_err = std::abs(estimate - instance.mu_star);
  } catch (const std::runtime_error&) {
    out.failed = true;
    out.abs_err = std::numeric_limits<double>::quiet_NaN();
  }
  out.ms = std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
               .count();
  return out;
}

}  // namespace

std::vector<SweepRow> run_error_sweep(const SweepConfig& config, int threads) {
  std::vector<Cell> cells;
  for (long long n : config.n_grid) {
    const long long m = config.m_rule.m_for(n);
    if (m < 1 || m > n) {
      char msg[120];
      std::snprintf(msg, sizeof(msg),
                    "sweep config: m rule yields m=%lld outside [1, %lld]", m, n);
      throw std::invalid_argument(msg);
    }
    for (EstimatorKind est : config.estimators) {
      cells.push_back({n, m, est});
    }
  }

  const long long trials = config.trials;
  std::vector<std::vector<TrialOutcome>> outcomes(
      cells.size(), std::vector<TrialOutcome>(static_cast<std::size_t>(trials)));

  const long long total_units = static_cast<long long>(cells.size()) * trials;
  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<long long>(workers, total_units));

  std::atomic<long long> next_unit{0};
  auto work = [&]() {
    for (;;) {
      const long long unit = next_unit.fetch_add(1);
      if (unit >= total_units) return;
      const std::size_t cell_idx = static_cast<std::size_t>(unit / trials);
      const long long trial = unit % trials;
      const Cell& cell = cells[cell_idx];
      std::uint64_t s = derive_seed(config.seed, static_cast<std::uint64_t>(cell.n));
      s = derive_seed(s, static_cast<std::uint64_t>(cell.m));
      s = derive_seed(s, static_cast<std::uint64_t>(
                             estimator_index(cell.estimator)));
      s = derive_seed(s, static_cast<std::uint64_t>(trial));
      outcomes[cell_idx][static_cast<std::size_t>(trial)] =
          run_trial(config, cell, s);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Cell& cell = cells[c];
    SweepRow row;
    row.n = cell.n;
    row.m = cell.m;
    row.estimator = estimator_name(cell.estimator);
    row.trials = trials;
    row.seed = config.seed;
    row.theory_bound = std::sqrt(static_cast<double>(cell.n) *
                                 std::log(static_cast<double>(cell.n))) /
                       static_cast<double>(cell.m);

    long long failures = 0;
    long long violations = 0;
    double wall_ms = 0.0;
    std::vector<double> errs;
    errs.reserve(static_cast<std::size_t>(trials));
    for (const TrialOutcome& o : outcomes[c]) {
      if (o.failed) ++failures;
      if (o.init_violation) ++violations;
      wall_ms += o.ms;
      errs.push_back(o.abs_err);
    }
    row.wall_time_ms = config.timing ? wall_ms : 0.0;

    if (failures > 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.mean_abs_err = nan;
      row.median_abs_err = nan;
      row.q90_abs_err = nan;
      std::fprintf(stderr,
                   "warning: cell n=%lld m=%lld estimator=%s failed in %lld/%lld "
                   "trials (step budget); statistics are NaN\n",
                   cell.n, cell.m, row.estimator.c_str(), failures, trials);
    } else {
      std::sort(errs.begin(), errs.end());
      double sum = 0.0;
      for (double e : errs) sum += e;
      row.mean_abs_err = sum / static_cast<double>(trials);
      row.median_abs_err = errs[static_cast<std::size_t>((trials - 1) / 2)];
      const long long q90_idx = static_cast<long long>(
          std::ceil(0.9 * static_cast<double>(trials))) - 1;
      row.q90_abs_err =
          errs[static_cast<std::size_t>(std::max<long long>(q90_idx, 0))];
    }
    if (violations > 0) {
      std::fprintf(stderr,
                   "warning: cell n=%lld m=%lld estimator=%s: default "
                   "initialization violated B >= 2|mu0 - mu*| in %lld/%lld "
                   "trials\n",
                   cell.n, cell.m, row.estimator.c_str(), violations, trials);
    }
    rows.push_back(std::move(row));
  }

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.n != b.n) return a.n < b.n;
    if (a.m != b.m) return a.m < b.m;
    return a.estimator < b.estimator;
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "n,m,estimator,trials,mean_abs_err,median_abs_err,q90_abs_err,"
         "theory_bound,seed,wall_time_ms\n";
  char buf[360];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%lld,%lld,%s,%lld,%.17g,%.17g,%.17g,%.17g,%llu,%.17g\n", r.n,
                  r.m, r.estimator.c_str(), r.trials, r.mean_abs_err,
                  r.median_abs_err, r.q90_abs_err, r.theory_bound,
                  static_cast<unsigned long long>(r.seed), r.wall_time_ms);
    out << buf;
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

std::vector<SweepRow> parse_sweep_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("sweep CSV: missing header");
  }
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
  const std::string expected =
      "n,m,estimator,trials,mean_abs_err,median_abs_err,q90_abs_err,"
      "theory_bound,seed,wall_time_ms";
  if (line != expected) {
    throw std::invalid_argument("sweep CSV: unexpected header: " + line);
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 10) {
      throw std::invalid_argument("sweep CSV: malformed row: " + line);
    }
    try {
      SweepRow r;
      r.n = std::stoll(fields[0]);
      r.m = std::stoll(fields[1]);
      r.estimator = fields[2];
      r.trials = std::stoll(fields[3]);
      r.mean_abs_err = std::stod(fields[4]);
      r.median_abs_err = std::stod(fields[5]);
      r.q90_abs_err = std::stod(fields[6]);
      r.theory_bound = std::stod(fields[7]);
      r.seed = std::stoull(fields[8]);
      r.wall_time_ms = std::stod(fields[9]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw std::invalid_argument("sweep CSV: malformed row: " + line);
    }
  }
  return rows;
}

std::pair<double, double> fit_scaling_exponent(const std::vector<SweepRow>& rows,
                                               FitVariable vary) {
  std::vector<double> xs, ys;
  std::set<long long> distinct;
  for (const SweepRow& r : rows) {
    const long long x = vary == FitVariable::n ? r.n : r.m;
    if (x < 1) {
      throw std::invalid_argument("fit_scaling_exponent: x must be positive");
    }
    if (!std::isfinite(r.median_abs_err) || r.median_abs_err <= 0.0) {
      throw std::invalid_argument(
          "fit_scaling_exponent: median_abs_err must be positive and finite");
    }
    distinct.insert(x);
    xs.push_back(std::log(static_cast<double>(x)));
    ys.push_back(std::log(r.median_abs_err));
  }
  if (distinct.size() < 3) {
    throw std::invalid_argument(
        "fit_scaling_exponent: degenerate fit, need >= 3 distinct x values");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double resid = (ys[i] - my) - slope * (xs[i] - mx);
    ss_res += resid * resid;
  }
  double r2;
  if (syy < 1e-20) {
    r2 = ss_res < 1e-20 ? 1.0 : 0.0;
  } else {
    r2 = 1.0 - ss_res / syy;
  }
  return {slope, r2};
}

}  // namespace entangled
