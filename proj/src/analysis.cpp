#include "entangled/analysis.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <queue>
#include <stdexcept>

#include "entangled/rng.hpp"

namespace entangled {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;

}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

namespace {

// Gauss-Kronrod 7-15 nodes and weights (positive half; node 7 is the center).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double err = 0.0;
};

struct PanelErrLess {
  bool operator()(const Panel& x, const Panel& y) const { return x.err < y.err; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double center = 0.5 * (a + b);
  const double fc = f(center);
  double resg = kWg[3] * fc;
  double resk = kWgk[7] * fc;
  double resabs = kWgk[7] * std::abs(fc);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    fv1[j] = f(center - dx);
    fv2[j] = f(center + dx);
    const double fsum = fv1[j] + fv2[j];
    resk += kWgk[j] * fsum;
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
  }
  for (int j = 0; j < 3; ++j) {
    resg += kWg[j] * (fv1[2 * j + 1] + fv2[2 * j + 1]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * h;
  resasc *= std::abs(h);
  resabs *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double roundoff = 50.0 * DBL_EPSILON * resabs;
  if (resabs > DBL_MIN / (50.0 * DBL_EPSILON)) err = std::max(err, roundoff);
  if (!std::isfinite(p.value) || !std::isfinite(err)) {
    throw std::runtime_error("quadrature: integrand returned a non-finite value");
  }
  p.err = err;
  return p;
}

}  // namespace

QuadratureResult quadrature(const std::function<double(double)>& integrand,
                            double lo, double hi, const QuadratureSpec& spec) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("quadrature: limits must be finite");
  }
  if (lo > hi) {
    throw std::invalid_argument("quadrature: lo must not exceed hi");
  }
  if (lo == hi) return {0.0, 0.0};

  // Seeding with a uniform split keeps narrow features from vanishing inside
  // one wide panel whose embedded error estimate would look converged.
  constexpr int kInitialPanels = 16;
  std::priority_queue<Panel, std::vector<Panel>, PanelErrLess> queue;
  double total_value = 0.0;
  double total_err = 0.0;
  for (int i = 0; i < kInitialPanels; ++i) {
    const double a = lo + (hi - lo) * (static_cast<double>(i) / kInitialPanels);
    const double b = (i + 1 == kInitialPanels)
                         ? hi
                         : lo + (hi - lo) * (static_cast<double>(i + 1) / kInitialPanels);
    Panel p = gk15(integrand, a, b);
    total_value += p.value;
    total_err += p.err;
    queue.push(p);
  }

  int subdivisions = 0;
  while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value))) {
    if (subdivisions >= spec.max_subdivisions) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "quadrature did not converge: error estimate %.3e after %d "
                    "subdivisions",
                    total_err, subdivisions);
      throw std::runtime_error(msg);
    }
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Panel at floating-point resolution; its error cannot shrink further.
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "quadrature did not converge: panel [%.17g, %.17g] cannot "
                    "be split",
                    worst.a, worst.b);
      throw std::runtime_error(msg);
    }
    Panel left = gk15(integrand, worst.a, mid);
    Panel right = gk15(integrand, mid, worst.b);
    total_value += left.value + right.value - worst.value;
    total_err += left.err + right.err - worst.err;
    queue.push(left);
    queue.push(right);
    ++subdivisions;
  }

  // Re-sum in interval order so the result does not depend on the incidental
  // accumulation order above.
  std::vector<Panel> panels;
  panels.reserve(queue.size());
  while (!queue.empty()) {
    panels.push_back(queue.top());
    queue.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  QuadratureResult result;
  for (const Panel& p : panels) {
    result.value += p.value;
    result.err_estimate += p.err;
  }
  return result;
}

QuadratureResult quadrature_split(const std::function<double(double)>& integrand,
                                  double lo, double hi,
                                  const std::vector<double>& breakpoints,
                                  const QuadratureSpec& spec) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("quadrature_split: limits must be finite");
  }
  if (lo > hi) {
    throw std::invalid_argument("quadrature_split: lo must not exceed hi");
  }
  std::vector<double> cuts;
  cuts.push_back(lo);
  for (double x : breakpoints) {
    if (x > lo && x < hi) cuts.push_back(x);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  QuadratureResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const QuadratureResult part = quadrature(integrand, cuts[i], cuts[i + 1], spec);
    total.value += part.value;
    total.err_estimate += part.err_estimate;
  }
  return total;
}

namespace {

void validate_bias_query(const BiasQuery& q) {
  if (!std::isfinite(q.sigma) || q.sigma <= 0.0) {
    throw std::invalid_argument("bias query: sigma must be positive and finite");
  }
  if (!std::isfinite(q.delta) || q.delta <= 0.0) {
    throw std::invalid_argument("bias query: delta must be positive and finite");
  }
  if (!std::isfinite(q.delta_e) || q.delta_e < 0.0) {
    throw std::invalid_argument(
        "bias query: delta_e must be non-negative and finite");
  }
}

}  // namespace

double truncated_mean_expectation(const BiasQuery& q) {
  validate_bias_query(q);
  const double a = (q.delta_e - q.delta) / q.sigma;
  const double b = (q.delta_e + q.delta) / q.sigma;
  return (q.delta_e - q.delta) * normal_cdf(a) +
         q.sigma * (normal_pdf(a) - normal_pdf(b)) +
         (q.delta_e + q.delta) * normal_sf(b);
}

BiasBoundResult bias_bound_check(const BiasQuery& q) {
  BiasBoundResult r;
  r.lhs = std::abs(truncated_mean_expectation(q));
  const double shrink = 0.2 * (q.delta / std::max(q.delta_e, q.delta)) *
                        (q.delta / std::max(q.sigma, q.delta));
  r.rhs = q.delta_e * (1.0 - shrink);
  r.holds = r.lhs <= r.rhs + 1e-12;
  return r;
}

double harmonic_mean_clamped(const std::vector<double>& sigmas, double delta) {
  if (sigmas.empty()) {
    throw std::invalid_argument("harmonic_mean_clamped: empty sigma list");
  }
  if (!std::isfinite(delta) || delta <= 0.0) {
    throw std::invalid_argument(
        "harmonic_mean_clamped: delta must be positive and finite");
  }
  double denom = 0.0;
  for (double s : sigmas) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw std::invalid_argument(
          "harmonic_mean_clamped: sigmas must be positive and finite");
    }
    denom += 1.0 / std::max(s, delta);
  }
  return static_cast<double>(sigmas.size()) / denom;
}

long long m_of_delta(const std::vector<double>& sigmas, double delta) {
  if (sigmas.empty()) {
    throw std::invalid_argument("m_of_delta: empty sigma list");
  }
  long long count = 0;
  for (double s : sigmas) {
    if (s <= delta) ++count;
  }
  return count;
}

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    std::string msg = "toolbox_integral: ";
    msg += name;
    msg += " must be positive and finite";
    throw std::invalid_argument(msg);
  }
}

void require_non_negative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    std::string msg = "toolbox_integral: ";
    msg += name;
    msg += " must be non-negative and finite";
    throw std::invalid_argument(msg);
  }
}

double double_factorial(int k) {
  double r = 1.0;
  for (int i = k; i >= 2; i -= 2) r *= i;
  return r;
}

// Antiderivative of x^2 exp(-x^2/2b^2) N(x; 0, c^2).
double f10(double x, double b, double c) {
  const double r = b * b + c * c;
  return b * b * b * c * c / (2.0 * r * std::sqrt(r)) *
             std::erf(x * std::sqrt(r) / (kSqrt2 * b * c)) -
         b * b * c * x / (kSqrt2Pi * r) *
             std::exp(-x * x / (2.0 * b * b) - x * x / (2.0 * c * c));
}

// Antiderivative of x^2 exp(-(x+M)^2/2b^2) N(x; 0, c^2).
double f11(double x, double b, double c, double M) {
  const double b2 = b * b, c2 = c * c;
  const double r = b2 + c2;
  const double t1 = b * c2 * (b2 * b2 + b2 * c2 + c2 * M * M) /
                    (2.0 * r * r * std::sqrt(r)) *
                    std::erf((b2 * x + c2 * M + c2 * x) / (kSqrt2 * b * c * std::sqrt(r))) *
                    std::exp(-M * M / (2.0 * r));
  const double t2 = b2 * c / (kSqrt2Pi * r * r) *
                    std::exp(-(M + x) * (M + x) / (2.0 * b2) - x * x / (2.0 * c2)) *
                    (b2 * x + c2 * (x - M));
  return t1 - t2;
}

}  // namespace

ToolboxResult toolbox_integral(ToolboxKind kind, const ToolboxParams& p) {
  ToolboxResult res;
  switch (kind) {
    case ToolboxKind::same_mean_product: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      res.exact = p.b / std::sqrt(p.b * p.b + p.c * p.c);
      return res;
    }
    case ToolboxKind::opposite_mean_product: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.L, "L");
      const double r = p.b * p.b + p.c * p.c;
      res.exact = p.b / std::sqrt(r) * std::exp(-2.0 * p.L * p.L / r);
      return res;
    }
    case ToolboxKind::double_exp_product: {
      require_positive(p.a, "a");
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.L, "L");
      const double a2 = p.a * p.a, b2 = p.b * p.b, c2 = p.c * p.c;
      const double s = a2 * b2 + a2 * c2 + b2 * c2;
      res.exact = p.a * p.b / std::sqrt(s) *
                  std::exp(-2.0 * p.L * p.L * (a2 + c2) / s);
      return res;
    }
    case ToolboxKind::x_weighted: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.L, "L");
      const double r = p.b * p.b + p.c * p.c;
      res.exact = p.b / std::sqrt(r) * std::exp(-2.0 * p.L * p.L / r) *
                  ((p.b * p.b - p.c * p.c) / r) * p.L;
      return res;
    }
    case ToolboxKind::x2_weighted_antiderivative: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      if (!std::isfinite(p.x_lo) || !std::isfinite(p.x_hi)) {
        throw std::invalid_argument("toolbox_integral: limits must be finite");
      }
      res.exact = f10(p.x_hi, p.b, p.c) - f10(p.x_lo, p.b, p.c);
      return res;
    }
    case ToolboxKind::x2_shifted_antiderivative: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.M, "M");
      if (!std::isfinite(p.x_lo) || !std::isfinite(p.x_hi)) {
        throw std::invalid_argument("toolbox_integral: limits must be finite");
      }
      res.exact = f11(p.x_hi, p.b, p.c, p.M) - f11(p.x_lo, p.b, p.c, p.M);
      return res;
    }
    case ToolboxKind::erf_linear_bound: {
      require_positive(p.eps, "eps");
      res.exact = std::erf(p.eps);
      res.bound = 2.0 / std::sqrt(kPi) * p.eps;
      return res;
    }
    case ToolboxKind::absolute_moment: {
      require_positive(p.c, "c");
      if (p.p < 0) {
        throw std::invalid_argument("toolbox_integral: p must be non-negative");
      }
      const double parity = (p.p % 2 == 1) ? std::sqrt(2.0 / kPi) : 1.0;
      res.exact = std::pow(p.c, p.p) * double_factorial(p.p - 1) * parity;
      return res;
    }
    case ToolboxKind::abs_difference: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.L, "L");
      const double b2 = p.b * p.b, c2 = p.c * p.c;
      const double r = b2 + c2;
      res.exact = p.b / std::sqrt(r) *
                      std::erf(std::sqrt(r / (2.0 * b2 * c2)) * p.L) +
                  p.b / std::sqrt(r) * std::exp(-2.0 * p.L * p.L / r) *
                      std::erf((c2 - b2) * p.L / (p.b * p.c * std::sqrt(2.0 * r)));
      res.bound = 4.0 / std::sqrt(kPi) * (c2 / r) * (p.L / p.c);
      return res;
    }
    case ToolboxKind::x_abs_diff_sq: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.M, "M");
      const double b2 = p.b * p.b, c2 = p.c * p.c;
      const double W = b2 + 2.0 * c2;
      const double em = -std::expm1(-p.M * p.M / (2.0 * b2));  // 1 - e^{-M^2/2b^2}
      const double t1 = 2.0 * b2 * p.c / (kSqrt2Pi * W) * em * em;
      const double t2 =
          2.0 * p.b * p.M * c2 / (W * std::sqrt(W)) *
          (std::exp(-p.M * p.M / W) *
               std::erf(2.0 * p.c * p.M / (p.b * std::sqrt(2.0 * W))) -
           std::exp(-(b2 + c2) * p.M * p.M / (2.0 * b2 * W)) *
               std::erf(p.c * p.M / (p.b * std::sqrt(2.0 * W))));
      res.exact = t1 + t2;
      res.bound = std::sqrt(32.0 / kPi) * c2 * p.c * p.M * p.M / (W * W);
      return res;
    }
    case ToolboxKind::x2_abs_diff: {
      require_positive(p.b, "b");
      require_positive(p.c, "c");
      require_non_negative(p.M, "M");
      const double b2 = p.b * p.b, c2 = p.c * p.c;
      const double r = b2 + c2;
      const double sr = std::sqrt(r);
      const double t1 =
          b2 * p.b * c2 / (r * sr) * std::erf(sr * p.M / (std::sqrt(8.0) * p.b * p.c));
      const double t2 = p.b * c2 * (b2 * b2 + b2 * c2 + c2 * p.M * p.M) /
                        (r * r * sr) *
                        std::erf((c2 - b2) * p.M / (2.0 * p.b * p.c * std::sqrt(2.0 * r))) *
                        std::exp(-p.M * p.M / (2.0 * r));
      const double t3 = 2.0 / kSqrt2Pi * b2 * c2 * p.c * p.M / (r * r) *
                        std::exp(-p.M * p.M / (8.0 * b2) - p.M * p.M / (8.0 * c2));
      res.exact = t1 + t2 + t3;
      return res;
    }
  }
  throw std::invalid_argument("toolbox_integral: unknown kind");
}

const char* toolbox_kind_name(ToolboxKind kind) {
  switch (kind) {
    case ToolboxKind::same_mean_product: return "same_mean_product";
    case ToolboxKind::opposite_mean_product: return "opposite_mean_product";
    case ToolboxKind::double_exp_product: return "double_exp_product";
    case ToolboxKind::x_weighted: return "x_weighted";
    case ToolboxKind::x2_weighted_antiderivative: return "x2_weighted_antiderivative";
    case ToolboxKind::x2_shifted_antiderivative: return "x2_shifted_antiderivative";
    case ToolboxKind::erf_linear_bound: return "erf_linear_bound";
    case ToolboxKind::absolute_moment: return "absolute_moment";
    case ToolboxKind::abs_difference: return "abs_difference";
    case ToolboxKind::x_abs_diff_sq: return "x_abs_diff_sq";
    case ToolboxKind::x2_abs_diff: return "x2_abs_diff";
  }
  return "unknown";
}

std::vector<ToolboxKind> all_toolbox_kinds() {
  return {ToolboxKind::same_mean_product,
          ToolboxKind::opposite_mean_product,
          ToolboxKind::double_exp_product,
          ToolboxKind::x_weighted,
          ToolboxKind::x2_weighted_antiderivative,
          ToolboxKind::x2_shifted_antiderivative,
          ToolboxKind::erf_linear_bound,
          ToolboxKind::absolute_moment,
          ToolboxKind::abs_difference,
          ToolboxKind::x_abs_diff_sq,
          ToolboxKind::x2_abs_diff};
}

ToolboxIntegrand toolbox_integrand(ToolboxKind kind, const ToolboxParams& p,
                                   double tail_cut) {
  ToolboxIntegrand out;
  const double b = p.b, c = p.c, L = p.L, M = p.M;
  const auto weight0 = [c](double x) {
    return std::exp(-x * x / (2.0 * c * c)) / (kSqrt2Pi * c);
  };
  const auto weightL = [c, L](double x) {
    return std::exp(-(x - L) * (x - L) / (2.0 * c * c)) / (kSqrt2Pi * c);
  };
  switch (kind) {
    case ToolboxKind::same_mean_product: {
      out.f = [b, L, weightL](double x) {
        return std::exp(-(x - L) * (x - L) / (2.0 * b * b)) * weightL(x);
      };
      const double s = std::max(b, c);
      out.lo = L - tail_cut * s;
      out.hi = L + tail_cut * s;
      out.breakpoints = {L};
      return out;
    }
    case ToolboxKind::opposite_mean_product: {
      out.f = [b, L, weightL](double x) {
        return std::exp(-(x + L) * (x + L) / (2.0 * b * b)) * weightL(x);
      };
      const double s = std::max(b, c);
      out.lo = -L - tail_cut * s;
      out.hi = L + tail_cut * s;
      out.breakpoints = {-L, 0.0, L};
      return out;
    }
    case ToolboxKind::double_exp_product: {
      const double a = p.a;
      out.f = [a, b, L, weightL](double x) {
        return std::exp(-(x - L) * (x - L) / (2.0 * a * a) -
                        (x + L) * (x + L) / (2.0 * b * b)) *
               weightL(x);
      };
      const double s = std::max(std::max(a, b), c);
      out.lo = -L - tail_cut * s;
      out.hi = L + tail_cut * s;
      out.breakpoints = {-L, 0.0, L};
      return out;
    }
    case ToolboxKind::x_weighted: {
      out.f = [b, L, weightL](double x) {
        return x * std::exp(-(x + L) * (x + L) / (2.0 * b * b)) * weightL(x);
      };
      const double s = std::max(b, c);
      out.lo = -L - tail_cut * s;
      out.hi = L + tail_cut * s;
      out.breakpoints = {-L, 0.0, L};
      return out;
    }
    case ToolboxKind::x2_weighted_antiderivative: {
      out.f = [b, weight0](double x) {
        return x * x * std::exp(-x * x / (2.0 * b * b)) * weight0(x);
      };
      out.lo = std::min(p.x_lo, p.x_hi);
      out.hi = std::max(p.x_lo, p.x_hi);
      return out;
    }
    case ToolboxKind::x2_shifted_antiderivative: {
      out.f = [b, M, weight0](double x) {
        return x * x * std::exp(-(x + M) * (x + M) / (2.0 * b * b)) * weight0(x);
      };
      out.lo = std::min(p.x_lo, p.x_hi);
      out.hi = std::max(p.x_lo, p.x_hi);
      return out;
    }
    case ToolboxKind::erf_linear_bound: {
      out.f = [](double t) { return 2.0 / std::sqrt(kPi) * std::exp(-t * t); };
      out.lo = 0.0;
      out.hi = p.eps;
      return out;
    }
    case ToolboxKind::absolute_moment: {
      const int pw = p.p;
      out.f = [pw, weight0](double x) {
        return std::pow(std::abs(x), pw) * weight0(x);
      };
      out.lo = -tail_cut * c;
      out.hi = tail_cut * c;
      out.breakpoints = {0.0};
      return out;
    }
    case ToolboxKind::abs_difference: {
      out.f = [b, L, weightL](double x) {
        return std::abs(std::exp(-(x - L) * (x - L) / (2.0 * b * b)) -
                        std::exp(-(x + L) * (x + L) / (2.0 * b * b))) *
               weightL(x);
      };
      const double s = std::max(b, c);
      out.lo = -L - tail_cut * s;
      out.hi = L + tail_cut * s;
      out.breakpoints = {0.0, -L, L};  // the absolute value has its kink at 0
      return out;
    }
    case ToolboxKind::x_abs_diff_sq: {
      out.f = [b, M, weight0](double x) {
        const double d = std::exp(-x * x / (2.0 * b * b)) -
                         std::exp(-(x + M) * (x + M) / (2.0 * b * b));
        return std::abs(x) * d * d * weight0(x);
      };
      const double s = std::max(b, c);
      out.lo = std::min(0.0, -M) - tail_cut * s;
      out.hi = tail_cut * s;
      out.breakpoints = {0.0, -M, -0.5 * M};
      return out;
    }
    case ToolboxKind::x2_abs_diff: {
      out.f = [b, M, weight0](double x) {
        return x * x *
               std::abs(std::exp(-x * x / (2.0 * b * b)) -
                        std::exp(-(x + M) * (x + M) / (2.0 * b * b))) *
               weight0(x);
      };
      const double s = std::max(b, c);
      out.lo = std::min(0.0, -M) - tail_cut * s;
      out.hi = tail_cut * s;
      out.breakpoints = {-0.5 * M, 0.0, -M};  // sign switch at -M/2
      return out;
    }
  }
  throw std::invalid_argument("toolbox_integrand: unknown kind");
}

namespace {

double log_uniform(SplitMix64& rng, double lo, double hi) {
  return lo * std::exp(rng.uniform01() * std::log(hi / lo));
}

std::uint64_t double_bits(double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof(u));
  return u;
}

std::string hash_params(ToolboxKind kind, const ToolboxParams& p) {
  std::uint64_t h = derive_seed(0x746f6f6c626f7821ull,
                                static_cast<std::uint64_t>(kind));
  for (double v : {p.a, p.b, p.c, p.L, p.M, p.eps, p.x_lo, p.x_hi,
                   static_cast<double>(p.p)}) {
    h = derive_seed(h, double_bits(v));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Random parameter draws for the verification suite. Scales are log-uniform;
// the two bound kinds with non-universal bounds are drawn inside the scale
// ratios where their bounds provably hold (see the kind comments).
ToolboxParams draw_params(ToolboxKind kind, SplitMix64& rng) {
  ToolboxParams p;
  switch (kind) {
    case ToolboxKind::same_mean_product:
    case ToolboxKind::opposite_mean_product:
    case ToolboxKind::x_weighted:
      p.b = log_uniform(rng, 0.1, 10.0);
      p.c = log_uniform(rng, 0.1, 10.0);
      p.L = log_uniform(rng, 0.01, 1.5) * p.c;
      return p;
    case ToolboxKind::double_exp_product:
      p.a = log_uniform(rng, 0.1, 10.0);
      p.b = log_uniform(rng, 0.1, 10.0);
      p.c = log_uniform(rng, 0.1, 10.0);
      p.L = log_uniform(rng, 0.01, 1.5) * p.c;
      return p;
    case ToolboxKind::x2_weighted_antiderivative:
    case ToolboxKind::x2_shifted_antiderivative: {
      p.b = log_uniform(rng, 0.1, 10.0);
      p.c = log_uniform(rng, 0.1, 10.0);
      p.M = log_uniform(rng, 0.01, 2.0) * std::max(p.b, p.c);
      const double s = std::max(p.b, p.c);
      const double u = (2.0 * rng.uniform01() - 1.0) * 3.0 * s;
      const double v = (2.0 * rng.uniform01() - 1.0) * 3.0 * s;
      p.x_lo = std::min(u, v);
      p.x_hi = std::max(u, v);
      return p;
    }
    case ToolboxKind::erf_linear_bound:
      p.eps = log_uniform(rng, 1e-6, 10.0);
      return p;
    case ToolboxKind::absolute_moment:
      p.c = log_uniform(rng, 0.1, 10.0);
      p.p = static_cast<int>(rng.below(7));
      return p;
    case ToolboxKind::abs_difference:
      p.b = log_uniform(rng, 0.1, 10.0);
      p.c = p.b * log_uniform(rng, 0.75, 10.0);
      p.L = log_uniform(rng, 0.01, 2.0) * p.c;
      return p;
    case ToolboxKind::x_abs_diff_sq:
      p.b = log_uniform(rng, 0.1, 10.0);
      p.c = p.b * log_uniform(rng, 0.5, 10.0);
      p.M = log_uniform(rng, 0.01, 5.0) * p.b;
      return p;
    case ToolboxKind::x2_abs_diff:
      p.b = log_uniform(rng, 0.1, 10.0);
      p.c = log_uniform(rng, 0.1, 10.0);
      p.M = log_uniform(rng, 0.01, 4.0) * std::max(p.b, p.c);
      return p;
  }
  throw std::invalid_argument("draw_params: unknown kind");
}

}  // namespace

std::vector<ToolboxCheckRow> run_toolbox_verification(int draws_per_kind,
                                                      std::uint64_t seed,
                                                      const QuadratureSpec& spec) {
  if (draws_per_kind < 1) {
    throw std::invalid_argument(
        "run_toolbox_verification: draws_per_kind must be at least 1");
  }
  std::vector<ToolboxCheckRow> rows;
  const auto kinds = all_toolbox_kinds();
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    SplitMix64 rng(derive_seed(seed, k));
    for (int d = 0; d < draws_per_kind; ++d) {
      const ToolboxParams params = draw_params(kinds[k], rng);
      const ToolboxResult closed = toolbox_integral(kinds[k], params);
      const ToolboxIntegrand gi = toolbox_integrand(kinds[k], params, spec.tail_cut);
      const QuadratureResult quad =
          quadrature_split(gi.f, gi.lo, gi.hi, gi.breakpoints, spec);
      ToolboxCheckRow row;
      row.kind = toolbox_kind_name(kinds[k]);
      row.params_hash = hash_params(kinds[k], params);
      row.closed_form = closed.exact;
      row.quadrature = quad.value;
      row.abs_diff = std::abs(closed.exact - quad.value);
      row.pass = row.abs_diff <= std::max(1e-8 * std::abs(closed.exact), 1e-12);
      if (closed.bound.has_value()) {
        row.pass = row.pass && closed.exact <= *closed.bound + 1e-12;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace entangled
