#include "trialsim/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trialsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void domain_error(const std::string& msg) {
  throw std::invalid_argument(msg);
}

// Continued fraction for the incomplete beta (Lentz's method).
double ibeta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

void validate(const BetaParams& p) {
  if (!(p.alpha > 0.0) || !(p.beta > 0.0)) {
    domain_error("beta parameters must be positive, got alpha=" +
                 std::to_string(p.alpha) + " beta=" + std::to_string(p.beta));
  }
}

void validate(const GammaParams& p) {
  if (!(p.shape > 0.0) || !(p.rate > 0.0)) {
    domain_error("gamma parameters must be positive, got shape=" +
                 std::to_string(p.shape) + " rate=" + std::to_string(p.rate));
  }
}

void validate(const PiecewiseHazard& h) {
  if (!(h.horizon > 0.0)) domain_error("hazard horizon must be positive");
  if (h.rates.size() != h.cutpoints.size() + 1) {
    domain_error("hazard needs one rate per interval (cutpoints + 1)");
  }
  double prev = 0.0;
  for (double c : h.cutpoints) {
    if (!(c > prev) || !(c < h.horizon)) {
      domain_error("hazard cutpoints must be strictly ascending in (0, horizon)");
    }
    prev = c;
  }
  for (double r : h.rates) {
    if (!(r >= 0.0)) domain_error("hazard rates must be nonnegative");
  }
}

double PiecewiseHazard::cumulative_hazard(double t) const {
  double total = 0.0;
  for (std::size_t j = 0; j < n_intervals(); ++j) {
    const double lo = interval_start(j);
    if (t <= lo) break;
    const double hi = interval_end(j);
    total += rates[j] * (std::min(t, hi) - lo);
  }
  return total;
}

PiecewiseHazard PiecewiseHazard::scaled(double factor) const {
  PiecewiseHazard out = *this;
  for (double& r : out.rates) r *= factor;
  return out;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_choose(long n, long k) {
  if (k < 0 || k > n) domain_error("log_choose: k outside [0, n]");
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double ibeta_reg(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) domain_error("ibeta_reg: shapes must be positive");
  if (x < 0.0 || x > 1.0) domain_error("ibeta_reg: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * ibeta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(log_front) * ibeta_cf(1.0 - x, b, a) / b;
}

double beta_cdf(double x, const BetaParams& p) {
  validate(p);
  return ibeta_reg(x, p.alpha, p.beta);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double binomial_log_pmf(long x, long n, double theta) {
  if (n < 0 || x < 0 || x > n) domain_error("binomial_log_pmf: need 0 <= x <= n");
  if (theta < 0.0 || theta > 1.0) domain_error("binomial_log_pmf: theta outside [0,1]");
  if (theta == 0.0) return x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (theta == 1.0) return x == n ? 0.0 : -std::numeric_limits<double>::infinity();
  return log_choose(n, x) + x * std::log(theta) + (n - x) * std::log1p(-theta);
}

double binomial_pmf(long x, long n, double theta) {
  return std::exp(binomial_log_pmf(x, n, theta));
}

double binomial_upper_tail(long x, long n, double theta) {
  if (n < 0 || x < 0 || x > n) domain_error("binomial_upper_tail: need 0 <= x <= n");
  if (theta < 0.0 || theta > 1.0) domain_error("binomial_upper_tail: theta outside [0,1]");
  if (x == 0) return 1.0;
  // P[X >= x] = I_theta(x, n-x+1)
  if (theta == 0.0) return 0.0;
  if (theta == 1.0) return 1.0;
  return ibeta_reg(theta, static_cast<double>(x), static_cast<double>(n - x + 1));
}

double binomial_lower_tail(long x, long n, double theta) {
  if (n < 0 || x < 0 || x > n) domain_error("binomial_lower_tail: need 0 <= x <= n");
  if (x == n) return 1.0;
  return 1.0 - binomial_upper_tail(x + 1, n, theta);
}

double beta_binomial_log_pmf(long x, long n, const BetaParams& p) {
  validate(p);
  if (n < 0 || x < 0 || x > n) domain_error("beta_binomial_log_pmf: need 0 <= x <= n");
  return log_choose(n, x) + log_beta(x + p.alpha, n - x + p.beta) -
         log_beta(p.alpha, p.beta);
}

double beta_binomial_pmf(long x, long n, const BetaParams& p) {
  return std::exp(beta_binomial_log_pmf(x, n, p));
}

double student_t_logpdf(double y, double nu) {
  if (!(nu > 0.0)) domain_error("student_t_logpdf: nu must be positive");
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * kPi) -
         0.5 * (nu + 1.0) * std::log1p(y * y / nu);
}

int sample_bernoulli(double theta, RngStream& rng) {
  if (theta < 0.0 || theta > 1.0) domain_error("sample_bernoulli: theta outside [0,1]");
  return rng.next_double() < theta ? 1 : 0;
}

long sample_binomial(long n, double theta, RngStream& rng) {
  if (n < 0) domain_error("sample_binomial: n must be nonnegative");
  if (theta < 0.0 || theta > 1.0) domain_error("sample_binomial: theta outside [0,1]");
  // Bernoulli sum; n is trial-sized throughout this library.
  long count = 0;
  for (long i = 0; i < n; ++i) count += rng.next_double() < theta ? 1 : 0;
  return count;
}

double sample_normal(double mean, double sd, RngStream& rng) {
  if (!(sd >= 0.0)) domain_error("sample_normal: sd must be nonnegative");
  const double u1 = rng.next_open();
  const double u2 = rng.next_double();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double sample_lognormal(double log_mean, double log_sd, RngStream& rng) {
  return std::exp(sample_normal(log_mean, log_sd, rng));
}

double sample_gamma(const GammaParams& p, RngStream& rng) {
  validate(p);
  // Marsaglia-Tsang squeeze; shape < 1 handled by the boosting identity.
  double shape = p.shape;
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(rng.next_open(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z, v;
    do {
      z = sample_normal(0.0, 1.0, rng);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_open();
    if (u < 1.0 - 0.0331 * z * z * z * z ||
        std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
      return boost * d * v / p.rate;
    }
  }
}

double sample_beta(const BetaParams& p, RngStream& rng) {
  validate(p);
  const double g1 = sample_gamma({p.alpha, 1.0}, rng);
  const double g2 = sample_gamma({p.beta, 1.0}, rng);
  return g1 / (g1 + g2);
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    domain_error("sample_inverse_gamma: parameters must be positive");
  }
  return scale / sample_gamma({shape, 1.0}, rng);
}

double sample_exponential(double rate, RngStream& rng) {
  if (!(rate > 0.0)) domain_error("sample_exponential: rate must be positive");
  return -std::log(rng.next_open()) / rate;
}

double sample_student_t(double nu, RngStream& rng) {
  if (!(nu > 0.0)) domain_error("sample_student_t: nu must be positive");
  const double z = sample_normal(0.0, 1.0, rng);
  const double chi2 = sample_gamma({0.5 * nu, 0.5}, rng);
  return z / std::sqrt(chi2 / nu);
}

EventTime sample_event_time(const PiecewiseHazard& h, RngStream& rng) {
  validate(h);
  const double target = -std::log(rng.next_open());  // unit exponential
  double accrued = 0.0;
  for (std::size_t j = 0; j < h.n_intervals(); ++j) {
    const double lo = h.interval_start(j);
    const double hi = h.interval_end(j);
    const double seg = h.rates[j] * (hi - lo);
    if (accrued + seg >= target && h.rates[j] > 0.0) {
      return {lo + (target - accrued) / h.rates[j], true};
    }
    accrued += seg;
  }
  return {h.horizon, false};
}

}  // namespace trialsim
