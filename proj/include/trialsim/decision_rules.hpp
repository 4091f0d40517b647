#pragma once

#include <functional>
#include <vector>

#include "trialsim/distributions.hpp"
#include "trialsim/trial_model.hpp"

namespace trialsim {

struct TestOutcome {
  double statistic;
  bool reject;
};

// Reject when the posterior probability of the alternative exceeds lambda.
struct PosteriorProbRule {
  Hypothesis hypothesis;
  double lambda;
};

TestOutcome posterior_prob_test(const PosteriorProbRule& rule,
                                const BetaParams& posterior);

// One-sided z test for a single proportion, no continuity correction.
// statistic is the one-sided p-value in the alternative's direction.
TestOutcome z_test(const BinaryDataset& data, const Hypothesis& hypothesis,
                   double alpha);

// One-sided exact binomial p-value: P[X >= x] under Ha: theta > theta0,
// P[X <= x] under Ha: theta < theta0.
double exact_binomial_pvalue(const BinaryDataset& data, const Hypothesis& hypothesis);

// Kaplan-Meier test at t_eval: reject when the lower bound of the two-sided
// 95% confidence interval clears `bound`. Greenwood variance throughout.
// The log-log transform is the default; `kPlain` is the untransformed
// S - z*sqrt(Var) bound.
struct GreenwoodRule {
  enum class Transform { kLogLog, kPlain };
  double t_eval = 52.0;
  double bound = 0.5;
  double z = 1.96;
  Transform transform = Transform::kLogLog;
};

TestOutcome greenwood_test(const SurvivalDataset& data, const GreenwoodRule& rule);

// ---- predictive probability -----------------------------------------------

// Monte Carlo predictive probability that the final test rejects, given the
// interim posterior: draw a parameter from the posterior, complete the trial
// with future_n simulated subjects, apply the final rule to the combined
// data, and average the rejections over `draws` repetitions.
double predictive_prob_binary(
    const BetaParams& interim_posterior, const BinaryDataset& interim_data,
    long future_n, int draws,
    const std::function<bool(const BinaryDataset&)>& final_rejects,
    RngStream& rng);

double predictive_prob_survival(const std::vector<GammaParams>& interim_posterior,
                                const SurvivalDataset& interim_data,
                                const PiecewiseHazard& layout, long future_n,
                                int draws, const GreenwoodRule& final_rule,
                                RngStream& rng);

// ---- p-value multiplicity procedures ----------------------------------------
// All return the set of rejected endpoint indices (0-based, ascending).

std::vector<std::size_t> bonferroni(const std::vector<double>& p_values, double alpha);
std::vector<std::size_t> holm(const std::vector<double>& p_values, double alpha);
std::vector<std::size_t> hochberg(const std::vector<double>& p_values, double alpha);

}  // namespace trialsim
