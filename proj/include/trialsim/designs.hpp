#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trialsim/decision_rules.hpp"
#include "trialsim/mcmc.hpp"
#include "trialsim/sim_engine.hpp"
#include "trialsim/trial_model.hpp"

namespace trialsim {

// Replication convention shared by every design: the engine hands each
// replication its base stream, data generation consumes the base stream
// directly, and any analysis-time Monte Carlo (posterior chains, predictive
// draws) runs on stream.child(1). Designs sharing a master seed therefore
// see identical subject-level data, which is what the per-seed dominance
// and reduction properties rely on.

// ---- design variants ---------------------------------------------------------

// Single-stage single-arm binary endpoint. Bayesian posterior-probability
// rule by default; the z-test variant is the frequentist reference design.
struct SingleBinaryDesign {
  enum class Test { kPosteriorProb, kZTest };
  long n = 150;
  BetaParams prior{1.0, 1.0};
  Hypothesis hypothesis{0.12, Direction::kLess};
  double lambda = 0.975;
  Test test = Test::kPosteriorProb;
  double alpha = 0.025;  // z-test significance level

  bool rejects_at(long x) const;
};

// K-stage group sequential design with early stopping for success only:
// at stage k the posterior from cumulative data is tested against
// thresholds[k]; rejection stops the trial.
struct GsdBinaryDesign {
  std::vector<long> stage_sizes;
  std::vector<double> thresholds;
  BetaParams prior{1.0, 1.0};
  Hypothesis hypothesis{0.12, Direction::kLess};

  long total_n() const;
};

// Single-stage binary design whose fitting prior borrows pilot data through
// a power prior with fixed weight a0.
struct BorrowingBinaryDesign {
  long n = 150;
  PilotData pilot{100, 5};
  double a0 = 0.0;
  BetaParams initial = kDefaultPowerPriorInitial;
  Hypothesis hypothesis{0.12, Direction::kLess};
  double lambda = 0.975;

  bool rejects_at(long x) const;
};

// Two-stage survival design: non-binding futility look after the first n1
// subjects complete follow-up, Greenwood test on all n at the final
// analysis. The scenario's parameter is the target survival probability at
// the horizon; the data-generating hazard is unit_layout scaled by
// derive_xi(theta).
struct FutilitySurvivalDesign {
  long n = 100;
  long n1 = 30;
  double gamma1 = 0.05;
  GammaParams hazard_prior{0.1, 0.1};
  PiecewiseHazard unit_layout = recurrence_unit_layout();
  GreenwoodRule final_rule{};
  int predictive_draws = 500;
};

// Test on the Student-t degrees of freedom with a logN(1,1) fitting prior;
// the statistic needs an inner elliptical slice chain whose length comes
// from SimulationSettings::inner_samples.
struct TdfDesign {
  long n = 100;
  double lambda = 0.985;
  Hypothesis hypothesis{5.0, Direction::kLess};
  EssConfig ess{};
};

// Primary endpoint family: per-arm binomial endpoints analysed jointly by a
// Bayesian hierarchical model (threshold lambda per endpoint) and
// marginally by the p-value procedures at family level alpha.
struct MultiplicityDesign {
  std::vector<long> arm_sizes;
  double theta0 = 0.35;
  double lambda = 0.985;
  double alpha = 0.025;
  BhmConfig bhm{};

  std::size_t n_endpoints() const { return arm_sizes.size(); }
};

using DesignSpec =
    std::variant<SingleBinaryDesign, GsdBinaryDesign, BorrowingBinaryDesign,
                 FutilitySurvivalDesign, TdfDesign, MultiplicityDesign>;

// ---- generic simulation entry points ----------------------------------------

int design_stage_count(const DesignSpec& design);

// Replication function for estimate_oc; validates design/scenario/settings
// consistency (endpoint counts, inner_samples for MCMC designs).
ReplicationFn make_replication_fn(const DesignSpec& design, const ScenarioSpec& scenario,
                                  const SimulationSettings& settings);

OperatingCharacteristics run_design(const DesignSpec& design, const ScenarioSpec& scenario,
                                    const SimulationSettings& settings);

// Power curve over scalar data-generating parameters (single-endpoint
// designs only).
PowerCurve design_power_curve(const DesignSpec& design, const std::vector<double>& grid,
                              const SimulationSettings& settings);

// ---- exact oracles -----------------------------------------------------------

// The binary test statistics depend on the data only through the success
// count, so operating characteristics are exact sums of binomial weights
// over the rejection region.
double exact_oc_binary(const SingleBinaryDesign& design, double theta_true);
double exact_oc_binary(const BorrowingBinaryDesign& design, double theta_true);

struct GsdExact {
  double reject_prob;
  double pet;
  double expected_n;
};

// Two-stage enumeration over (x1, x2).
GsdExact exact_oc_gsd(const GsdBinaryDesign& design, double theta_true);

// Exact rejection probability where available, otherwise nullopt.
std::optional<double> exact_oc(const DesignSpec& design, double theta_true);

// ---- pre-planning quantities ---------------------------------------------------

// Probability of the study claim before any new data: beta-binomial weight
// of the rejection region under the fitting prior used as sampling prior.
double prior_claim_probability(const BetaParams& prior, long n,
                               const PosteriorProbRule& rule);
double prior_claim_probability_mc(const BetaParams& prior, long n,
                                  const PosteriorProbRule& rule,
                                  const SimulationSettings& settings);

// ---- sample size search --------------------------------------------------------

struct SampleSizeSearchSpec {
  std::vector<long> candidates;
  ErrorRequirements requirements;
  ScenarioSpec null_scenario;
  ScenarioSpec alt_scenario;
};

struct CandidateEvaluation {
  long n;
  double type1;
  Interval type1_ci;
  double power;
  Interval power_ci;
  bool exact;
  bool meets_requirements;
};

struct SearchResult {
  std::optional<long> chosen;
  std::vector<CandidateEvaluation> evaluations;
  std::string message;
};

// Walks the ascending candidate list and returns the first size whose
// estimated type I error and power meet the requirements (point estimates;
// confidence bounds are reported for stricter callers).
SearchResult search_sample_size(const SampleSizeSearchSpec& search,
                                const SingleBinaryDesign& design_template,
                                const SimulationSettings& settings, bool use_exact);

// ---- multiplicity ---------------------------------------------------------------

enum class MultiplicityMethod { kBhm, kBonferroni, kHolm, kHochberg };

inline constexpr std::array<MultiplicityMethod, 4> kAllMultiplicityMethods{
    MultiplicityMethod::kBhm, MultiplicityMethod::kBonferroni,
    MultiplicityMethod::kHolm, MultiplicityMethod::kHochberg};

std::string to_string(MultiplicityMethod m);

// Rejection rates under one scenario. reject_any is the familywise type I
// error rate under the null scenario and the disjunctive power under the
// alternative; reject_all is the conjunctive power.
struct MultiplicityResult {
  double reject_any = 0.0;
  double reject_all = 0.0;
  std::vector<double> per_endpoint;
  long any_count = 0;
  long all_count = 0;
  long replications = 0;
};

// Rejection sets of one simulated family, all methods on the same data.
struct MultiplicityReplication {
  std::array<std::vector<std::size_t>, 4> rejected;  // indexed by method order

  const std::vector<std::size_t>& set(MultiplicityMethod m) const {
    return rejected[static_cast<std::size_t>(m)];
  }
};

MultiplicityReplication simulate_multiplicity_replication(
    const MultiplicityDesign& design, const ScenarioSpec& scenario, int inner_samples,
    RngStream& stream);

std::array<MultiplicityResult, 4> run_multiplicity(const MultiplicityDesign& design,
                                                   const ScenarioSpec& scenario,
                                                   const SimulationSettings& settings);

}  // namespace trialsim
