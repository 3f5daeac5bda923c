#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

// Closed-form truncated-Gaussian bias, clamped harmonic means, a toolbox of
// closed-form Gaussian integrals, and the adaptive-quadrature oracle used to
// verify all of them.
namespace entangled {

// Numerical contracts: the standard normal CDF and survival function are
// evaluated through erfc, accurate to ~1e-15 relative over the full range.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);  // 1 - normal_cdf(x), without cancellation

// log(1 + exp(u)) without overflow or underflow for any finite u.
double softplus(double u);

// Bias of a truncated sample: x ~ N(mu_star, sigma^2) clamped to
// [mu - delta, mu + delta] with delta_e = mu - mu_star >= 0.
struct BiasQuery {
  double sigma = 1.0;    // > 0
  double delta = 1.0;    // > 0
  double delta_e = 0.0;  // >= 0
};

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  double tail_cut = 12.0;  // integrate over mean +- tail_cut * sigma
};

struct QuadratureResult {
  double value = 0.0;
  double err_estimate = 0.0;
};

// Globally adaptive Gauss-Kronrod 7-15 on [lo, hi]. The interval is seeded
// with a uniform split so narrow features are not lost to a single wide
// panel. Throws std::runtime_error if the error estimate cannot be brought
// below max(abs_tol, rel_tol * |value|) within max_subdivisions.
QuadratureResult quadrature(const std::function<double(double)>& integrand,
                            double lo, double hi,
                            const QuadratureSpec& spec = {});

// Same, but integrates piecewise between the given interior breakpoints
// (clamped into (lo, hi), sorted, deduplicated). Use for integrands with
// kinks or spikes far narrower than the interval.
QuadratureResult quadrature_split(const std::function<double(double)>& integrand,
                                  double lo, double hi,
                                  const std::vector<double>& breakpoints,
                                  const QuadratureSpec& spec = {});

// E[clamp(x) - mu_star] in closed form:
//   (delta_e - delta) Phi(a) + sigma (phi(a) - phi(b)) + (delta_e + delta) SF(b)
// with a = (delta_e - delta) / sigma, b = (delta_e + delta) / sigma.
double truncated_mean_expectation(const BiasQuery& q);

struct BiasBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// lhs = |truncated_mean_expectation|, rhs = the bias bound
//   delta_e (1 - (1/5) (delta / max(delta_e, delta)) (delta / max(sigma, delta))),
// holds = lhs <= rhs + 1e-12.
BiasBoundResult bias_bound_check(const BiasQuery& q);

// n / sum(1 / max(sigma_i, delta)).
double harmonic_mean_clamped(const std::vector<double>& sigmas, double delta);

// Count of sigma_i <= delta (boundary inclusive).
long long m_of_delta(const std::vector<double>& sigmas, double delta);

// Closed-form Gaussian integrals. Each kind is a definite integral with a
// closed-form value; three of them ("bound" kinds) also carry a stated upper
// bound, returned alongside the exact value rather than asserted. Throughout,
// r = b^2 + c^2 and the weight density is N(x; center, c^2).
enum class ToolboxKind {
  // int exp(-(x-L)^2/2b^2) N(x; L, c^2) dx = b / sqrt(r)
  same_mean_product,
  // int exp(-(x+L)^2/2b^2) N(x; L, c^2) dx = (b / sqrt(r)) exp(-2L^2 / r)
  opposite_mean_product,
  // int exp(-(x-L)^2/2a^2 - (x+L)^2/2b^2) N(x; L, c^2) dx
  //   = ab / sqrt(s) * exp(-2L^2 (a^2 + c^2) / s), s = a^2b^2 + a^2c^2 + b^2c^2
  double_exp_product,
  // int x exp(-(x+L)^2/2b^2) N(x; L, c^2) dx
  //   = (b / sqrt(r)) exp(-2L^2 / r) ((b^2 - c^2) / r) L
  x_weighted,
  // int_{x_lo}^{x_hi} x^2 exp(-x^2/2b^2) N(x; 0, c^2) dx, via antiderivative
  //   F(x) = b^3 c^2 / (2 r^{3/2}) erf(x sqrt(r) / (sqrt(2) b c))
  //        - b^2 c x / (sqrt(2 pi) r) exp(-x^2/2b^2 - x^2/2c^2)
  x2_weighted_antiderivative,
  // int_{x_lo}^{x_hi} x^2 exp(-(x+M)^2/2b^2) N(x; 0, c^2) dx, via
  //   F(x) = b c^2 (b^4 + b^2 c^2 + c^2 M^2) / (2 r^{5/2})
  //            * erf((b^2 x + c^2 M + c^2 x) / (sqrt(2) b c sqrt(r))) exp(-M^2/2r)
  //        - b^2 c / (sqrt(2 pi) r^2) exp(-(M+x)^2/2b^2 - x^2/2c^2)
  //            * (b^2 x + c^2 (x - M))
  x2_shifted_antiderivative,
  // exact = erf(eps); bound = (2 / sqrt(pi)) eps
  erf_linear_bound,
  // int |x|^p N(x; 0, c^2) dx = c^p (p-1)!! * (sqrt(2/pi) if p odd, else 1)
  absolute_moment,
  // int |exp(-(x-L)^2/2b^2) - exp(-(x+L)^2/2b^2)| N(x; L, c^2) dx
  //   = (b/sqrt(r)) erf(sqrt(r/(2 b^2 c^2)) L)
  //   + (b/sqrt(r)) exp(-2L^2/r) erf((c^2 - b^2) L / (b c sqrt(2 r)))
  // bound = (4/sqrt(pi)) (c^2/r) (L/c); the bound holds for c/b >~ 0.62 and
  // can fail when c << b, so verification draws keep c/b >= 0.75.
  abs_difference,
  // int |x| (exp(-x^2/2b^2) - exp(-(x+M)^2/2b^2))^2 N(x; 0, c^2) dx, with
  // W = b^2 + 2c^2:
  //   = 2 b^2 c / (sqrt(2 pi) W) (1 - exp(-M^2/2b^2))^2
  //   + (2 b M c^2 / W^{3/2}) [ exp(-M^2/W) erf(2 c M / (b sqrt(2 W)))
  //                           - exp(-(b^2+c^2) M^2 / (2 b^2 W))
  //                             * erf(c M / (b sqrt(2 W))) ]
  // bound = sqrt(32/pi) c^3 M^2 / W^2; holds for c/b >~ 0.3, verification
  // draws keep c/b >= 0.5.
  x_abs_diff_sq,
  // int x^2 |exp(-x^2/2b^2) - exp(-(x+M)^2/2b^2)| N(x; 0, c^2) dx
  //   = b^3 c^2 / r^{3/2} erf(sqrt(r) M / (sqrt(8) b c))
  //   + b c^2 (b^4 + b^2 c^2 + c^2 M^2) / r^{5/2}
  //       * erf((c^2 - b^2) M / (2 b c sqrt(2 r))) exp(-M^2 / (2 r))
  //   + (2/sqrt(2 pi)) b^2 c^3 M / r^2 exp(-M^2/8b^2 - M^2/8c^2)
  x2_abs_diff,
};

// Kind-specific parameters; unused fields are ignored. Scale parameters
// (a, b, c) must be positive; L, M, eps must be non-negative; p >= 0.
struct ToolboxParams {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double L = 0.0;
  double M = 0.0;
  double eps = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int p = 0;
};

struct ToolboxResult {
  double exact = 0.0;
  std::optional<double> bound;  // set for the three bound kinds only
};

ToolboxResult toolbox_integral(ToolboxKind kind, const ToolboxParams& params);

const char* toolbox_kind_name(ToolboxKind kind);
std::vector<ToolboxKind> all_toolbox_kinds();

// The defining integrand of a kind, together with integration limits and
// breakpoints suitable for the quadrature oracle. Exposed so tests and the
// verification suite integrate exactly what the closed form claims to equal.
struct ToolboxIntegrand {
  std::function<double(double)> f;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;
};

ToolboxIntegrand toolbox_integrand(ToolboxKind kind, const ToolboxParams& params,
                                   double tail_cut = 12.0);

// One row of the closed-form-vs-quadrature verification suite.
struct ToolboxCheckRow {
  std::string kind;
  std::string params_hash;  // 16 hex digits over the parameter bit patterns
  double closed_form = 0.0;
  double quadrature = 0.0;
  double abs_diff = 0.0;
  bool pass = false;
};

// Runs draws_per_kind random parameter draws for every kind. pass requires
// |closed - quad| <= max(1e-8 |closed|, 1e-12) and, for bound kinds,
// exact <= bound + 1e-12.
std::vector<ToolboxCheckRow> run_toolbox_verification(
    int draws_per_kind, std::uint64_t seed, const QuadratureSpec& spec = {});

}  // namespace entangled
