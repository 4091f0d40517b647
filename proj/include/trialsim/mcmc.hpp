#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "trialsim/rng.hpp"

namespace trialsim {

// Draws from an MCMC run, sample-major. Parameter layout is documented on
// the kernel that produced the chain.
class ChainOutput {
 public:
  ChainOutput(std::size_t n_params, std::size_t n_samples)
      : n_params_(n_params), data_(n_params * n_samples) {}

  std::size_t n_params() const { return n_params_; }
  std::size_t n_samples() const { return n_params_ == 0 ? 0 : data_.size() / n_params_; }

  double at(std::size_t sample, std::size_t param) const {
    return data_[sample * n_params_ + param];
  }
  double& at(std::size_t sample, std::size_t param) {
    return data_[sample * n_params_ + param];
  }

  std::vector<double> column(std::size_t param) const;
  double column_mean(std::size_t param) const;
  // Fraction of draws of `param` strictly below x.
  double fraction_below(std::size_t param, double x) const;

 private:
  std::size_t n_params_;
  std::vector<double> data_;
};

// Elliptical slice sampler configuration for the Student-t degrees-of-freedom
// posterior. The prior on log(theta) is N(prior_mean, prior_sd^2), i.e.
// theta ~ logN(prior_mean, prior_sd).
struct EssConfig {
  double prior_mean = 1.0;
  double prior_sd = 1.0;
  int n_samples = 3000;
  int burn_in = 500;
};

// Elliptical slice sampling of a scalar with Gaussian prior N(mean, sd^2)
// and arbitrary log-likelihood. Returns the raw parameter chain.
ChainOutput ess_gaussian_scalar(const std::function<double(double)>& loglik,
                                const EssConfig& cfg, RngStream& rng);

// Posterior of the t degrees of freedom given data, sampled on eta = log
// theta so the Gaussian-prior requirement of the sampler holds exactly.
// Chain column 0 holds theta = exp(eta) after burn-in.
ChainOutput ess_t_posterior(std::span<const double> data, const EssConfig& cfg,
                            RngStream& rng);

// Hierarchical binomial-logit model: y_i ~ Bin(n_i, theta_i),
// logit(theta_i) = phi_i ~ N(mu, sigma^2), mu | sigma^2 ~ N(nu, sigma^2/omega),
// sigma^2 ~ IG(a, b).
struct BhmConfig {
  double nu = 0.0;
  double omega = 0.01;
  double a = 0.001;
  double b = 0.001;
  int n_samples = 2000;
  int burn_in = 1000;
};

// Gibbs over (mu, sigma^2) in closed form and univariate slice updates for
// each phi_i. Chain columns: theta_1..theta_K, mu, sigma^2.
ChainOutput bhm_posterior(const std::vector<long>& y, const std::vector<long>& n,
                          const BhmConfig& cfg, RngStream& rng);

inline constexpr double kPsrfFlagThreshold = 1.05;

// Potential scale reduction factor across the supplied chains, one value
// per parameter; values above kPsrfFlagThreshold indicate nonconvergence.
// Identical chains report exactly 1.
std::vector<double> psrf(const std::vector<ChainOutput>& chains);

}  // namespace trialsim
