#include "trialsim/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "trialsim/distributions.hpp"

namespace trialsim {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double log1p_exp(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// One elliptical slice move for a scalar with prior N(mean, sd^2).
double ess_move(double current, double current_loglik, double mean, double sd,
                const std::function<double(double)>& loglik, RngStream& rng,
                double* out_loglik) {
  const double nu = sample_normal(0.0, sd, rng);
  const double log_y = current_loglik + std::log(rng.next_open());
  double angle = rng.next_double() * kTwoPi;
  double angle_min = angle - kTwoPi;
  double angle_max = angle;
  const double f = current - mean;
  for (;;) {
    const double proposal = mean + f * std::cos(angle) + nu * std::sin(angle);
    const double ll = loglik(proposal);
    if (ll > log_y) {
      *out_loglik = ll;
      return proposal;
    }
    if (angle < 0.0) {
      angle_min = angle;
    } else {
      angle_max = angle;
    }
    angle = angle_min + rng.next_double() * (angle_max - angle_min);
  }
}

// Univariate slice sampler with stepping out (Neal 2003).
double slice_move(double current, const std::function<double(double)>& logdens,
                  double width, RngStream& rng) {
  const double log_y = logdens(current) + std::log(rng.next_open());
  double lo = current - width * rng.next_double();
  double hi = lo + width;
  for (int i = 0; i < 100 && logdens(lo) > log_y; ++i) lo -= width;
  for (int i = 0; i < 100 && logdens(hi) > log_y; ++i) hi += width;
  for (;;) {
    const double proposal = lo + rng.next_double() * (hi - lo);
    if (logdens(proposal) > log_y) return proposal;
    if (proposal < current) {
      lo = proposal;
    } else {
      hi = proposal;
    }
  }
}

}  // namespace

std::vector<double> ChainOutput::column(std::size_t param) const {
  std::vector<double> out(n_samples());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = at(s, param);
  return out;
}

double ChainOutput::column_mean(std::size_t param) const {
  double sum = 0.0;
  for (std::size_t s = 0; s < n_samples(); ++s) sum += at(s, param);
  return sum / static_cast<double>(n_samples());
}

double ChainOutput::fraction_below(std::size_t param, double x) const {
  std::size_t count = 0;
  for (std::size_t s = 0; s < n_samples(); ++s) {
    if (at(s, param) < x) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(n_samples());
}

ChainOutput ess_gaussian_scalar(const std::function<double(double)>& loglik,
                                const EssConfig& cfg, RngStream& rng) {
  if (cfg.n_samples <= 0) throw std::invalid_argument("ess: n_samples must be positive");
  if (!(cfg.prior_sd > 0.0)) throw std::invalid_argument("ess: prior_sd must be positive");

  double state = cfg.prior_mean;
  double state_ll = loglik(state);
  if (!std::isfinite(state_ll)) {
    throw std::runtime_error("ess: non-finite log-likelihood at the prior mean");
  }
  ChainOutput chain(1, static_cast<std::size_t>(cfg.n_samples));
  const int total = cfg.burn_in + cfg.n_samples;
  for (int it = 0; it < total; ++it) {
    state = ess_move(state, state_ll, cfg.prior_mean, cfg.prior_sd, loglik, rng,
                     &state_ll);
    if (it >= cfg.burn_in) chain.at(static_cast<std::size_t>(it - cfg.burn_in), 0) = state;
  }
  return chain;
}

ChainOutput ess_t_posterior(std::span<const double> data, const EssConfig& cfg,
                            RngStream& rng) {
  if (data.empty()) throw std::invalid_argument("ess_t_posterior: empty data");
  std::vector<double> squared(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) squared[i] = data[i] * data[i];
  const auto n = static_cast<double>(data.size());

  const auto loglik = [&](double eta) {
    const double nu = std::exp(eta);
    double tail_sum = 0.0;
    for (const double y2 : squared) tail_sum += std::log1p(y2 / nu);
    const double norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                        0.5 * std::log(nu * 3.14159265358979323846);
    const double ll = n * norm - 0.5 * (nu + 1.0) * tail_sum;
    if (!std::isfinite(ll)) {
      throw std::runtime_error("ess_t_posterior: non-finite log-likelihood");
    }
    return ll;
  };

  ChainOutput chain = ess_gaussian_scalar(loglik, cfg, rng);
  for (std::size_t s = 0; s < chain.n_samples(); ++s) {
    chain.at(s, 0) = std::exp(chain.at(s, 0));
  }
  return chain;
}

ChainOutput bhm_posterior(const std::vector<long>& y, const std::vector<long>& n,
                          const BhmConfig& cfg, RngStream& rng) {
  const std::size_t k = y.size();
  if (k == 0 || n.size() != k) {
    throw std::invalid_argument("bhm_posterior: need matching nonempty y and n");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (n[i] < 0 || y[i] < 0 || y[i] > n[i]) {
      throw std::invalid_argument("bhm_posterior: need 0 <= y_i <= n_i");
    }
  }
  if (cfg.n_samples <= 0) throw std::invalid_argument("bhm_posterior: n_samples must be positive");
  if (!(cfg.omega > 0.0) || !(cfg.a > 0.0) || !(cfg.b > 0.0)) {
    throw std::invalid_argument("bhm_posterior: omega, a, b must be positive");
  }

  std::vector<double> phi(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double rate = (y[i] + 0.5) / (n[i] + 1.0);
    phi[i] = std::log(rate / (1.0 - rate));
  }
  double mu = 0.0;
  for (const double p : phi) mu += p;
  mu /= static_cast<double>(k);
  double sigma2 = 1.0;

  ChainOutput chain(k + 2, static_cast<std::size_t>(cfg.n_samples));
  const int total = cfg.burn_in + cfg.n_samples;
  for (int it = 0; it < total; ++it) {
    // mu | phi, sigma^2: normal with precision-weighted mean.
    double phi_sum = 0.0;
    for (const double p : phi) phi_sum += p;
    const double denom = cfg.omega + static_cast<double>(k);
    mu = sample_normal((cfg.omega * cfg.nu + phi_sum) / denom,
                       std::sqrt(sigma2 / denom), rng);

    // sigma^2 | phi, mu: inverse gamma.
    double ss = cfg.omega * (mu - cfg.nu) * (mu - cfg.nu);
    for (const double p : phi) ss += (p - mu) * (p - mu);
    sigma2 = sample_inverse_gamma(cfg.a + 0.5 * (static_cast<double>(k) + 1.0),
                                  cfg.b + 0.5 * ss, rng);

    // phi_i | rest: binomial-logit times the normal prior, slice sampled.
    // Width tracks the prior scale so stepping out can cross diffuse
    // conditionals (sigma^2 is occasionally huge under the vague hyperprior).
    const double width = std::max(1.0, std::sqrt(sigma2));
    for (std::size_t i = 0; i < k; ++i) {
      const double yi = static_cast<double>(y[i]);
      const double ni = static_cast<double>(n[i]);
      const auto logdens = [&](double p) {
        return yi * p - ni * log1p_exp(p) - 0.5 * (p - mu) * (p - mu) / sigma2;
      };
      phi[i] = slice_move(phi[i], logdens, width, rng);
    }

    if (it >= cfg.burn_in) {
      const auto s = static_cast<std::size_t>(it - cfg.burn_in);
      for (std::size_t i = 0; i < k; ++i) {
        chain.at(s, i) = 1.0 / (1.0 + std::exp(-phi[i]));
      }
      chain.at(s, k) = mu;
      chain.at(s, k + 1) = sigma2;
    }
  }
  return chain;
}

std::vector<double> psrf(const std::vector<ChainOutput>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("psrf: need at least two chains");
  const std::size_t n_params = chains.front().n_params();
  const std::size_t len = chains.front().n_samples();
  for (const auto& c : chains) {
    if (c.n_params() != n_params || c.n_samples() != len) {
      throw std::invalid_argument("psrf: chain shape mismatch");
    }
  }
  if (len < 2) throw std::invalid_argument("psrf: chains too short");

  std::vector<double> out(n_params);
  for (std::size_t p = 0; p < n_params; ++p) {
    std::vector<double> means;
    std::vector<double> vars;
    for (const auto& c : chains) {
      double m = 0.0;
      for (std::size_t s = 0; s < len; ++s) m += c.at(s, p);
      m /= static_cast<double>(len);
      double v = 0.0;
      for (std::size_t s = 0; s < len; ++s) {
        const double d = c.at(s, p) - m;
        v += d * d;
      }
      v /= static_cast<double>(len - 1);
      means.push_back(m);
      vars.push_back(v);
    }
    const auto m_seq = static_cast<double>(means.size());
    double grand = 0.0;
    for (const double m : means) grand += m;
    grand /= m_seq;
    double b_over_n = 0.0;  // B/L: between-chain variance of sequence means
    for (const double m : means) b_over_n += (m - grand) * (m - grand);
    b_over_n /= (m_seq - 1.0);
    double w = 0.0;
    for (const double v : vars) w += v;
    w /= m_seq;

    const auto l = static_cast<double>(len);
    if (w <= 0.0) {
      out[p] = b_over_n <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      continue;
    }
    const double var_plus = (l - 1.0) / l * w + b_over_n;
    // identical chains give B = 0; floor the ratio so they report exactly 1
    out[p] = std::sqrt(std::max(1.0, var_plus / w));
  }
  return out;
}

}  // namespace trialsim
