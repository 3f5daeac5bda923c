#include "entangled/instances.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "entangled/rng.hpp"

namespace entangled {

TwoPointPrior make_two_point_prior(double p, double sigma_p, double sigma_q,
                                   double L, const PriorConstants& constants) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("two-point prior: p must lie in [0, 1]");
  }
  if (!std::isfinite(sigma_p) || sigma_p <= 0.0) {
    throw std::invalid_argument("two-point prior: sigma_p must be positive");
  }
  if (!std::isfinite(sigma_q) || sigma_q <= sigma_p) {
    throw std::invalid_argument(
        "two-point prior: sigma_q must be finite and exceed sigma_p");
  }
  if (!std::isfinite(L) || L < 0.0) {
    throw std::invalid_argument("two-point prior: L must be non-negative");
  }
  TwoPointPrior prior;
  prior.p = p;
  prior.q = 1.0 - p;
  prior.sigma_p = sigma_p;
  prior.sigma_q = sigma_q;
  prior.L = L;
  prior.alpha = (p / sigma_p) / (prior.q / sigma_q);
  prior.beta = 2.0 * L / (sigma_q * sigma_q);
  prior.gamma = sigma_p / sigma_q;
  prior.sigma_pq =
      sigma_p * sigma_q / std::sqrt((sigma_q - sigma_p) * (sigma_q + sigma_p));
  prior.constants = constants;
  prior.well_conditioned = prior.q > constants.C_q * p &&
                           sigma_q > constants.C_sigma * sigma_p &&
                           L < constants.c_L * sigma_q &&
                           prior.alpha < constants.c_alpha;
  return prior;
}

namespace {

void validate_noise(const NoiseConfig& noise) {
  switch (noise.kind) {
    case NoiseKind::constant:
      if (!std::isfinite(noise.level) || noise.level <= 1.0) {
        throw std::invalid_argument("noise config: constant level must exceed 1");
      }
      return;
    case NoiseKind::geometric_ladder:
      if (!std::isfinite(noise.level) || noise.level <= 1.0) {
        throw std::invalid_argument("noise config: ladder level must exceed 1");
      }
      if (!std::isfinite(noise.base) || noise.base < 1.0) {
        throw std::invalid_argument("noise config: ladder base must be >= 1");
      }
      if (noise.rungs < 1) {
        throw std::invalid_argument("noise config: rungs must be >= 1");
      }
      return;
    case NoiseKind::pareto_tail:
      if (!std::isfinite(noise.level) || noise.level < 1.0) {
        throw std::invalid_argument("noise config: pareto level must be >= 1");
      }
      if (!std::isfinite(noise.alpha_tail) || noise.alpha_tail <= 0.0) {
        throw std::invalid_argument(
            "noise config: pareto tail index must be positive");
      }
      return;
    case NoiseKind::custom_list:
      if (noise.values.empty()) {
        throw std::invalid_argument("noise config: custom list is empty");
      }
      for (double v : noise.values) {
        if (!std::isfinite(v) || v <= 1.0) {
          throw std::invalid_argument(
              "noise config: custom sigmas must all exceed 1");
        }
      }
      return;
  }
  throw std::invalid_argument("noise config: unknown kind");
}

double noise_sigma(const NoiseConfig& noise, long long j, SplitMix64& rng) {
  switch (noise.kind) {
    case NoiseKind::constant:
      return noise.level;
    case NoiseKind::geometric_ladder:
      return noise.level *
             std::pow(noise.base, static_cast<double>(j % noise.rungs));
    case NoiseKind::pareto_tail:
      return noise.level * std::pow(rng.uniform01(), -1.0 / noise.alpha_tail);
    case NoiseKind::custom_list:
      return noise.values[static_cast<std::size_t>(j) % noise.values.size()];
  }
  throw std::invalid_argument("noise config: unknown kind");
}

}  // namespace

std::pair<GaussianInstance, SampleSet> generate_subset_of_signals(
    long long n, long long m, double mu_star, double sigma_signal,
    const NoiseConfig& noise, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("generate_subset_of_signals: n must be >= 1");
  }
  if (m < 1 || m > n) {
    throw std::invalid_argument(
        "generate_subset_of_signals: m must lie in [1, n]");
  }
  if (!std::isfinite(sigma_signal) || sigma_signal <= 0.0 ||
      sigma_signal > 1.0) {
    throw std::invalid_argument(
        "generate_subset_of_signals: sigma_signal must lie in (0, 1]");
  }
  if (!std::isfinite(mu_star)) {
    throw std::invalid_argument(
        "generate_subset_of_signals: mu_star must be finite");
  }
  if (m < n) validate_noise(noise);

  SplitMix64 rng(seed);
  GaussianInstance instance;
  instance.mu_star = mu_star;
  instance.sigmas.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < m; ++i) instance.sigmas.push_back(sigma_signal);
  for (long long j = 0; j < n - m; ++j) {
    const double s = noise_sigma(noise, j, rng);
    if (!std::isfinite(s) || s <= 1.0) {
      throw std::invalid_argument(
          "generate_subset_of_signals: noise config produced sigma <= 1");
    }
    instance.sigmas.push_back(s);
  }
  rng.shuffle(instance.sigmas);

  SampleSet samples;
  samples.seed = seed;
  samples.values.reserve(static_cast<std::size_t>(n));
  for (double s : instance.sigmas) {
    samples.values.push_back(mu_star + s * rng.normal());
  }
  return {std::move(instance), std::move(samples)};
}

namespace {

void emit_warning(std::vector<std::string>* warnings, std::string msg) {
  if (warnings != nullptr) {
    warnings->push_back(std::move(msg));
  } else {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
  }
}

void validate_case_args(long long n, long long m, double C_sigma, double c_L) {
  if (n < 2) throw std::invalid_argument("case params: n must be >= 2");
  if (m < 1 || m >= n) {
    throw std::invalid_argument("case params: m must lie in [1, n)");
  }
  if (!std::isfinite(C_sigma) || C_sigma <= 0.0) {
    throw std::invalid_argument("case params: C_sigma must be positive");
  }
  if (!std::isfinite(c_L) || c_L <= 0.0) {
    throw std::invalid_argument("case params: c_L must be positive");
  }
}

}  // namespace

TwoPointPrior case1_params(long long n, long long m, double C_sigma, double c_L,
                           std::vector<std::string>* warnings) {
  validate_case_args(n, m, C_sigma, c_L);
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(m) / nd;
  const double lower = 2.0 * std::log(nd);
  const double upper = 2.0 * std::pow(nd, 0.25);
  if (static_cast<double>(m) < lower || static_cast<double>(m) > upper) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "sparse-regime guard: m=%lld outside [2 ln n, 2 n^(1/4)] = "
                  "[%.3f, %.3f] at n=%lld",
                  m, lower, upper, n);
    emit_warning(warnings, buf);
  }
  const double sigma_q = C_sigma / (p * p * nd);
  const double L = c_L / (p * p * nd * std::sqrt(nd));
  PriorConstants constants;
  constants.C_sigma = C_sigma;
  constants.c_L = c_L;
  return make_two_point_prior(p, 1.0, sigma_q, L, constants);
}

TwoPointPrior case2_params(long long n, long long m, double C_sigma, double c_L,
                           std::vector<std::string>* warnings) {
  validate_case_args(n, m, C_sigma, c_L);
  const double nd = static_cast<double>(n);
  const double p = static_cast<double>(m) / nd;
  const double lower = std::pow(nd, 0.25);
  if (static_cast<double>(m) < lower) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "dense-regime guard: m=%lld below n^(1/4) = %.3f at n=%lld",
                  m, lower, n);
    emit_warning(warnings, buf);
  }
  const double p23 = std::pow(p, 2.0 / 3.0);
  const double sigma_q = C_sigma / p23;
  const double L = c_L / (p23 * std::sqrt(nd));
  PriorConstants constants;
  constants.C_sigma = C_sigma;
  constants.c_L = c_L;
  return make_two_point_prior(p, 1.0, sigma_q, L, constants);
}

PriorSample sample_prior_instance(const TwoPointPrior& prior, long long n,
                                  std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("sample_prior_instance: n must be >= 1");
  }
  SplitMix64 rng(seed);
  PriorSample out;
  out.instance.sigmas.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    out.instance.sigmas.push_back(rng.uniform01() < prior.p ? prior.sigma_p
                                                            : prior.sigma_q);
  }
  out.true_sign = rng.uniform01() < 0.5 ? +1 : -1;
  out.instance.mu_star = out.true_sign * prior.L;
  out.samples.seed = seed;
  out.samples.values.reserve(static_cast<std::size_t>(n));
  for (double s : out.instance.sigmas) {
    out.samples.values.push_back(out.instance.mu_star + s * rng.normal());
  }
  return out;
}

nlohmann::json instance_to_json(const GaussianInstance& instance,
                                std::uint64_t seed) {
  nlohmann::json doc;
  doc["mu_star"] = instance.mu_star;
  doc["sigmas"] = instance.sigmas;
  doc["seed"] = seed;
  return doc;
}

std::pair<GaussianInstance, std::uint64_t> instance_from_json(
    const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("mu_star") || !doc.contains("sigmas") ||
      !doc.contains("seed")) {
    throw std::invalid_argument(
        "instance JSON must contain mu_star, sigmas, seed");
  }
  GaussianInstance instance;
  instance.mu_star = doc.at("mu_star").get<double>();
  instance.sigmas = doc.at("sigmas").get<std::vector<double>>();
  return {std::move(instance), doc.at("seed").get<std::uint64_t>()};
}

void write_samples_csv(std::ostream& out, const SampleSet& samples) {
  char buf[64];
  for (double v : samples.values) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v);
    out << buf;
  }
}

SampleSet read_samples_csv(std::istream& in) {
  SampleSet samples;
  std::string line;
  while (std::getline(in, line)) {
    // Tolerate trailing carriage returns and blank lines.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("samples CSV: non-numeric line: " + line);
    }
    while (pos < line.size() && line[pos] == ' ') ++pos;
    if (pos != line.size()) {
      throw std::invalid_argument("samples CSV: trailing junk on line: " + line);
    }
    samples.values.push_back(v);
  }
  return samples;
}

}  // namespace entangled
