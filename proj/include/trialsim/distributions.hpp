#pragma once

#include <cstdint>
#include <vector>

#include "trialsim/rng.hpp"

namespace trialsim {

struct BetaParams {
  double alpha;
  double beta;
};

struct GammaParams {
  double shape;
  double rate;
};

// Piecewise-constant hazard on [0, horizon] with interval boundaries
// 0 < cutpoints[0] < ... < cutpoints.back() < horizon. rates[j] applies to
// the j-th interval; rates.size() == cutpoints.size() + 1.
struct PiecewiseHazard {
  std::vector<double> cutpoints;
  std::vector<double> rates;
  double horizon;

  std::size_t n_intervals() const { return rates.size(); }
  double interval_start(std::size_t j) const {
    return j == 0 ? 0.0 : cutpoints[j - 1];
  }
  double interval_end(std::size_t j) const {
    return j + 1 == rates.size() ? horizon : cutpoints[j];
  }
  double cumulative_hazard(double t) const;
  PiecewiseHazard scaled(double factor) const;
};

void validate(const BetaParams& p);
void validate(const GammaParams& p);
void validate(const PiecewiseHazard& h);

// ---- special functions -----------------------------------------------------

double log_beta(double a, double b);
double log_choose(long n, long k);

// Regularized incomplete beta I_x(a,b), continued fraction with symmetry
// switch; absolute error below 1e-12 over the full domain.
double ibeta_reg(double x, double a, double b);

double beta_cdf(double x, const BetaParams& p);
double normal_cdf(double z);

// ---- densities -------------------------------------------------------------

double binomial_log_pmf(long x, long n, double theta);
double binomial_pmf(long x, long n, double theta);
// P[X >= x] for X ~ Binomial(n, theta).
double binomial_upper_tail(long x, long n, double theta);
// P[X <= x].
double binomial_lower_tail(long x, long n, double theta);

double beta_binomial_log_pmf(long x, long n, const BetaParams& p);
double beta_binomial_pmf(long x, long n, const BetaParams& p);

// Student t density with nu degrees of freedom, zero location, unit scale.
double student_t_logpdf(double y, double nu);

// ---- samplers --------------------------------------------------------------

int sample_bernoulli(double theta, RngStream& rng);
long sample_binomial(long n, double theta, RngStream& rng);
double sample_normal(double mean, double sd, RngStream& rng);
double sample_lognormal(double log_mean, double log_sd, RngStream& rng);
double sample_gamma(const GammaParams& p, RngStream& rng);
double sample_beta(const BetaParams& p, RngStream& rng);
// Density proportional to x^(-shape-1) exp(-scale/x).
double sample_inverse_gamma(double shape, double scale, RngStream& rng);
double sample_exponential(double rate, RngStream& rng);
double sample_student_t(double nu, RngStream& rng);

struct EventTime {
  double time;
  bool event;  // false: administratively censored at the horizon
};

// Inverse cumulative-hazard transform of a unit exponential draw.
EventTime sample_event_time(const PiecewiseHazard& h, RngStream& rng);

}  // namespace trialsim
