#pragma once

#include <vector>

#include "trialsim/distributions.hpp"

namespace trialsim {

// Direction of the alternative hypothesis relative to the performance goal.
enum class Direction { kGreater, kLess };

struct Hypothesis {
  double theta0;
  Direction direction;
};

enum class ScenarioLabel { kNullBoundary, kAlternative, kCustom };

// Point-mass sampling prior: the true data-generating parameter(s), one per
// arm/endpoint.
struct ScenarioSpec {
  std::vector<double> true_params;
  ScenarioLabel label = ScenarioLabel::kCustom;
};

struct BinaryDataset {
  long n;
  long x;
};

struct SurvivalRecord {
  double time;
  bool event;
};

struct SurvivalDataset {
  std::vector<SurvivalRecord> records;
};

struct PilotData {
  long n0;
  long x0;
};

struct ErrorRequirements {
  double alpha;
  double beta;
};

void validate(const BinaryDataset& d);
void validate(const PilotData& d);
void validate(const ErrorRequirements& r);

// ---- conjugate updates -----------------------------------------------------

// Beta(a,b) prior, binomial data -> Beta(a + x, b + n - x).
BetaParams beta_posterior(const BetaParams& prior, const BinaryDataset& data);

// Pilot likelihood raised to a0 times a Beta initial prior, then the current
// data: Beta(x + a0*x0 + alpha0, n - x + a0*(n0 - x0) + beta0).
BetaParams power_prior_posterior(const BetaParams& initial, const PilotData& pilot,
                                 double a0, const BinaryDataset& data);

inline constexpr BetaParams kDefaultPowerPriorInitial{0.01, 0.01};

// Per-interval Gamma(shape + d_j, rate + T_j), where d_j counts events in
// interval j and T_j is the exposure time accrued in interval j by all
// subjects (events and censored alike).
std::vector<GammaParams> piecewise_posterior(const std::vector<GammaParams>& prior,
                                             const SurvivalDataset& data,
                                             const PiecewiseHazard& layout);
std::vector<GammaParams> piecewise_posterior(const GammaParams& prior_each,
                                             const SurvivalDataset& data,
                                             const PiecewiseHazard& layout);

// ---- survival model --------------------------------------------------------

// S(t) = exp(-cumulative hazard).
double survival_prob(const PiecewiseHazard& h, double t);

// Unit layout of the recurrence model: rates (0.1, 0.05, 0.01) per week on
// intervals split at weeks 8 and 24, horizon 52. Multiply by xi to obtain
// the data-generating hazard.
PiecewiseHazard recurrence_unit_layout();

// xi such that the scaled unit layout has S(horizon) = theta_target; for the
// recurrence layout the cumulative unit hazard to week 52 is
// 0.1*8 + 0.05*16 + 0.01*28 = 1.88, so xi = -ln(theta_target)/1.88.
double derive_xi(double theta_target, const PiecewiseHazard& unit_layout);
double derive_xi(double theta_target);

}  // namespace trialsim
