#include "trialsim/trial_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace trialsim {

void validate(const BinaryDataset& d) {
  if (d.n < 0 || d.x < 0 || d.x > d.n) {
    throw std::invalid_argument("binary dataset needs 0 <= x <= n, got x=" +
                                std::to_string(d.x) + " n=" + std::to_string(d.n));
  }
}

void validate(const PilotData& d) {
  if (d.n0 < 0 || d.x0 < 0 || d.x0 > d.n0) {
    throw std::invalid_argument("pilot data needs 0 <= x0 <= n0");
  }
}

void validate(const ErrorRequirements& r) {
  // The closed upper end admits vacuous requirements (alpha = beta = 1).
  if (!(r.alpha > 0.0 && r.alpha <= 1.0) || !(r.beta > 0.0 && r.beta <= 1.0)) {
    throw std::invalid_argument("error requirements need alpha, beta in (0,1]");
  }
}

BetaParams beta_posterior(const BetaParams& prior, const BinaryDataset& data) {
  validate(prior);
  validate(data);
  return {prior.alpha + data.x, prior.beta + (data.n - data.x)};
}

BetaParams power_prior_posterior(const BetaParams& initial, const PilotData& pilot,
                                 double a0, const BinaryDataset& data) {
  validate(initial);
  validate(pilot);
  validate(data);
  if (!(a0 >= 0.0 && a0 <= 1.0)) {
    throw std::invalid_argument("power parameter a0 must lie in [0,1], got " +
                                std::to_string(a0));
  }
  return {data.x + a0 * pilot.x0 + initial.alpha,
          data.n - data.x + a0 * (pilot.n0 - pilot.x0) + initial.beta};
}

std::vector<GammaParams> piecewise_posterior(const std::vector<GammaParams>& prior,
                                             const SurvivalDataset& data,
                                             const PiecewiseHazard& layout) {
  validate(layout);
  if (prior.size() != layout.n_intervals()) {
    throw std::invalid_argument("need one gamma prior per hazard interval");
  }
  for (const auto& g : prior) validate(g);

  std::vector<GammaParams> post = prior;
  for (const auto& rec : data.records) {
    if (!(rec.time > 0.0) || rec.time > layout.horizon) {
      throw std::invalid_argument("survival time outside (0, horizon]");
    }
    for (std::size_t j = 0; j < layout.n_intervals(); ++j) {
      const double lo = layout.interval_start(j);
      const double hi = layout.interval_end(j);
      if (rec.time <= lo) break;
      post[j].rate += std::min(rec.time, hi) - lo;  // exposure in interval j
      if (rec.event && rec.time <= hi) {
        post[j].shape += 1.0;
        break;
      }
    }
  }
  return post;
}

std::vector<GammaParams> piecewise_posterior(const GammaParams& prior_each,
                                             const SurvivalDataset& data,
                                             const PiecewiseHazard& layout) {
  return piecewise_posterior(
      std::vector<GammaParams>(layout.n_intervals(), prior_each), data, layout);
}

double survival_prob(const PiecewiseHazard& h, double t) {
  validate(h);
  if (t < 0.0 || t > h.horizon) {
    throw std::invalid_argument("survival_prob: t outside [0, horizon]");
  }
  return std::exp(-h.cumulative_hazard(t));
}

PiecewiseHazard recurrence_unit_layout() {
  return PiecewiseHazard{{8.0, 24.0}, {0.1, 0.05, 0.01}, 52.0};
}

double derive_xi(double theta_target, const PiecewiseHazard& unit_layout) {
  validate(unit_layout);
  if (!(theta_target > 0.0 && theta_target < 1.0)) {
    throw std::invalid_argument("derive_xi: target survival must lie in (0,1)");
  }
  const double unit_cumulative = unit_layout.cumulative_hazard(unit_layout.horizon);
  if (!(unit_cumulative > 0.0)) {
    throw std::invalid_argument("derive_xi: unit layout has zero cumulative hazard");
  }
  return -std::log(theta_target) / unit_cumulative;
}

double derive_xi(double theta_target) {
  return derive_xi(theta_target, recurrence_unit_layout());
}

}  // namespace trialsim
