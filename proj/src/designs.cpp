#include "trialsim/designs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace trialsim {

namespace {

void check_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
  }
}

void check_binary_goal(const Hypothesis& h) {
  if (!(h.theta0 > 0.0 && h.theta0 < 1.0)) {
    throw std::invalid_argument("binary performance goal must lie in (0,1)");
  }
}

void validate(const SingleBinaryDesign& d) {
  if (d.n < 1) throw std::invalid_argument("single design: n must be >= 1");
  validate(d.prior);
  check_binary_goal(d.hypothesis);
  check_probability(d.lambda, "lambda");
  if (!(d.alpha > 0.0 && d.alpha < 1.0)) {
    throw std::invalid_argument("single design: alpha must lie in (0,1)");
  }
}

void validate(const GsdBinaryDesign& d) {
  if (d.stage_sizes.empty() || d.stage_sizes.size() != d.thresholds.size()) {
    throw std::invalid_argument("gsd design: need matching stage sizes and thresholds");
  }
  for (long s : d.stage_sizes) {
    if (s < 1) throw std::invalid_argument("gsd design: stage sizes must be positive");
  }
  for (double t : d.thresholds) check_probability(t, "stage threshold");
  validate(d.prior);
  check_binary_goal(d.hypothesis);
}

void validate(const BorrowingBinaryDesign& d) {
  if (d.n < 1) throw std::invalid_argument("borrowing design: n must be >= 1");
  validate(d.pilot);
  validate(d.initial);
  check_binary_goal(d.hypothesis);
  check_probability(d.lambda, "lambda");
  if (!(d.a0 >= 0.0 && d.a0 <= 1.0)) {
    throw std::invalid_argument("borrowing design: a0 must lie in [0,1]");
  }
}

void validate(const FutilitySurvivalDesign& d) {
  if (d.n < 1 || d.n1 < 1 || d.n1 > d.n) {
    throw std::invalid_argument("futility design: need 1 <= n1 <= n");
  }
  check_probability(d.gamma1, "gamma1");
  validate(d.hazard_prior);
  validate(d.unit_layout);
  if (d.predictive_draws < 1) {
    throw std::invalid_argument("futility design: predictive_draws must be >= 1");
  }
}

void validate(const TdfDesign& d) {
  if (d.n < 1) throw std::invalid_argument("tdf design: n must be >= 1");
  check_probability(d.lambda, "lambda");
  if (!(d.hypothesis.theta0 > 0.0)) {
    throw std::invalid_argument("tdf design: performance goal must be positive");
  }
}

void validate(const MultiplicityDesign& d) {
  if (d.arm_sizes.empty()) {
    throw std::invalid_argument("multiplicity design: need at least one endpoint");
  }
  for (long n : d.arm_sizes) {
    if (n < 1) throw std::invalid_argument("multiplicity design: arm sizes must be positive");
  }
  check_probability(d.lambda, "lambda");
  if (!(d.alpha > 0.0 && d.alpha < 1.0)) {
    throw std::invalid_argument("multiplicity design: alpha must lie in (0,1)");
  }
  check_probability(d.theta0, "theta0");
}

double scenario_scalar(const ScenarioSpec& scenario) {
  if (scenario.true_params.size() != 1) {
    throw std::invalid_argument("scenario must carry exactly one parameter for this design");
  }
  return scenario.true_params.front();
}

double posterior_prob_statistic(const Hypothesis& hyp, const BetaParams& post) {
  const double lower = beta_cdf(hyp.theta0, post);
  return hyp.direction == Direction::kLess ? lower : 1.0 - lower;
}

}  // namespace

bool SingleBinaryDesign::rejects_at(long x) const {
  const BinaryDataset data{n, x};
  if (test == Test::kZTest) return z_test(data, hypothesis, alpha).reject;
  const BetaParams post = beta_posterior(prior, data);
  return posterior_prob_test({hypothesis, lambda}, post).reject;
}

long GsdBinaryDesign::total_n() const {
  long total = 0;
  for (long s : stage_sizes) total += s;
  return total;
}

bool BorrowingBinaryDesign::rejects_at(long x) const {
  const BetaParams post = power_prior_posterior(initial, pilot, a0, {n, x});
  return posterior_prob_test({hypothesis, lambda}, post).reject;
}

int design_stage_count(const DesignSpec& design) {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GsdBinaryDesign>) {
          return static_cast<int>(d.stage_sizes.size());
        } else if constexpr (std::is_same_v<T, FutilitySurvivalDesign>) {
          return 2;
        } else {
          return 1;
        }
      },
      design);
}

namespace {

ReplicationOutcome run_single_binary(const SingleBinaryDesign& d, double theta,
                                     RngStream& stream) {
  ReplicationOutcome out;
  out.reject = d.rejects_at(sample_binomial(d.n, theta, stream));
  out.n_enrolled = d.n;
  return out;
}

ReplicationOutcome run_gsd(const GsdBinaryDesign& d, double theta, RngStream& stream) {
  ReplicationOutcome out;
  const std::size_t stages = d.stage_sizes.size();
  long cum_n = 0;
  long cum_x = 0;
  for (std::size_t s = 0; s < stages; ++s) {
    cum_x += sample_binomial(d.stage_sizes[s], theta, stream);
    cum_n += d.stage_sizes[s];
    const BetaParams post = beta_posterior(d.prior, {cum_n, cum_x});
    if (posterior_prob_statistic(d.hypothesis, post) > d.thresholds[s]) {
      out.reject = true;
      out.decision_stage = static_cast<int>(s + 1);
      out.stopped_early = s + 1 < stages;
      out.n_enrolled = cum_n;
      return out;
    }
  }
  out.decision_stage = static_cast<int>(stages);
  out.n_enrolled = cum_n;
  return out;
}

ReplicationOutcome run_borrowing(const BorrowingBinaryDesign& d, double theta,
                                 RngStream& stream) {
  ReplicationOutcome out;
  out.reject = d.rejects_at(sample_binomial(d.n, theta, stream));
  out.n_enrolled = d.n;
  return out;
}

ReplicationOutcome run_futility_survival(const FutilitySurvivalDesign& d, double theta,
                                         RngStream& stream) {
  const double xi = derive_xi(theta, d.unit_layout);
  const PiecewiseHazard truth = d.unit_layout.scaled(xi);

  SurvivalDataset data;
  data.records.reserve(static_cast<std::size_t>(d.n));
  for (long i = 0; i < d.n1; ++i) {
    const EventTime et = sample_event_time(truth, stream);
    data.records.push_back({et.time, et.event});
  }

  ReplicationOutcome out;
  if (d.gamma1 > 0.0) {
    const auto post = piecewise_posterior(d.hazard_prior, data, d.unit_layout);
    RngStream analysis = stream.child(1);
    const double pp =
        predictive_prob_survival(post, data, d.unit_layout, d.n - d.n1,
                                 d.predictive_draws, d.final_rule, analysis);
    if (pp < d.gamma1) {
      out.stopped_early = true;
      out.decision_stage = 1;
      out.n_enrolled = d.n1;
      return out;
    }
  }
  for (long i = d.n1; i < d.n; ++i) {
    const EventTime et = sample_event_time(truth, stream);
    data.records.push_back({et.time, et.event});
  }
  out.reject = greenwood_test(data, d.final_rule).reject;
  out.decision_stage = 2;
  out.n_enrolled = d.n;
  return out;
}

ReplicationOutcome run_tdf(const TdfDesign& d, double theta, int inner_samples,
                           RngStream& stream) {
  std::vector<double> y(static_cast<std::size_t>(d.n));
  for (double& v : y) v = sample_student_t(theta, stream);

  EssConfig cfg = d.ess;
  cfg.n_samples = inner_samples;
  RngStream analysis = stream.child(1);
  const ChainOutput chain = ess_t_posterior(y, cfg, analysis);

  const double below = chain.fraction_below(0, d.hypothesis.theta0);
  const double statistic =
      d.hypothesis.direction == Direction::kLess ? below : 1.0 - below;
  ReplicationOutcome out;
  out.reject = statistic > d.lambda;
  out.n_enrolled = d.n;
  return out;
}

}  // namespace

ReplicationFn make_replication_fn(const DesignSpec& design, const ScenarioSpec& scenario,
                                  const SimulationSettings& settings) {
  return std::visit(
      [&](const auto& d) -> ReplicationFn {
        using T = std::decay_t<decltype(d)>;
        validate(d);
        if constexpr (std::is_same_v<T, SingleBinaryDesign>) {
          const double theta = scenario_scalar(scenario);
          check_probability(theta, "true theta");
          return [d, theta](RngStream& s) { return run_single_binary(d, theta, s); };
        } else if constexpr (std::is_same_v<T, GsdBinaryDesign>) {
          const double theta = scenario_scalar(scenario);
          check_probability(theta, "true theta");
          return [d, theta](RngStream& s) { return run_gsd(d, theta, s); };
        } else if constexpr (std::is_same_v<T, BorrowingBinaryDesign>) {
          const double theta = scenario_scalar(scenario);
          check_probability(theta, "true theta");
          return [d, theta](RngStream& s) { return run_borrowing(d, theta, s); };
        } else if constexpr (std::is_same_v<T, FutilitySurvivalDesign>) {
          const double theta = scenario_scalar(scenario);
          if (!(theta > 0.0 && theta < 1.0)) {
            throw std::invalid_argument("survival scenario needs theta in (0,1)");
          }
          return [d, theta](RngStream& s) { return run_futility_survival(d, theta, s); };
        } else if constexpr (std::is_same_v<T, TdfDesign>) {
          const double theta = scenario_scalar(scenario);
          if (!(theta > 0.0)) {
            throw std::invalid_argument("degrees-of-freedom scenario needs theta > 0");
          }
          if (settings.inner_samples <= 0) {
            throw std::invalid_argument(
                "this design needs settings.inner_samples > 0 for the posterior chain");
          }
          const int inner = settings.inner_samples;
          return [d, theta, inner](RngStream& s) { return run_tdf(d, theta, inner, s); };
        } else {
          static_assert(std::is_same_v<T, MultiplicityDesign>);
          throw std::invalid_argument(
              "multiplicity designs run through run_multiplicity, not estimate_oc");
        }
      },
      design);
}

OperatingCharacteristics run_design(const DesignSpec& design, const ScenarioSpec& scenario,
                                    const SimulationSettings& settings) {
  return estimate_oc(make_replication_fn(design, scenario, settings),
                     design_stage_count(design), settings);
}

PowerCurve design_power_curve(const DesignSpec& design, const std::vector<double>& grid,
                              const SimulationSettings& settings) {
  const ScenarioLabel label = ScenarioLabel::kCustom;
  return power_curve(
      [&](double theta) {
        return make_replication_fn(design, ScenarioSpec{{theta}, label}, settings);
      },
      design_stage_count(design), grid, settings);
}

// ---- exact oracles -----------------------------------------------------------

double exact_oc_binary(const SingleBinaryDesign& design, double theta_true) {
  validate(design);
  check_probability(theta_true, "true theta");
  double total = 0.0;
  for (long x = 0; x <= design.n; ++x) {
    if (design.rejects_at(x)) total += binomial_pmf(x, design.n, theta_true);
  }
  return total;
}

double exact_oc_binary(const BorrowingBinaryDesign& design, double theta_true) {
  validate(design);
  check_probability(theta_true, "true theta");
  double total = 0.0;
  for (long x = 0; x <= design.n; ++x) {
    if (design.rejects_at(x)) total += binomial_pmf(x, design.n, theta_true);
  }
  return total;
}

GsdExact exact_oc_gsd(const GsdBinaryDesign& design, double theta_true) {
  validate(design);
  check_probability(theta_true, "true theta");
  if (design.stage_sizes.size() != 2) {
    throw std::invalid_argument("exact_oc_gsd enumerates two-stage designs only");
  }
  const long n1 = design.stage_sizes[0];
  const long n2 = design.stage_sizes[1];

  // Stage-2 rejection depends on the pooled count, so precompute it once.
  const long total_n = n1 + n2;
  std::vector<char> rejects_final(static_cast<std::size_t>(total_n) + 1);
  for (long x = 0; x <= total_n; ++x) {
    const BetaParams post = beta_posterior(design.prior, {total_n, x});
    rejects_final[static_cast<std::size_t>(x)] =
        posterior_prob_statistic(design.hypothesis, post) > design.thresholds[1];
  }

  double reject_prob = 0.0;
  double pet = 0.0;
  for (long x1 = 0; x1 <= n1; ++x1) {
    const double w1 = binomial_pmf(x1, n1, theta_true);
    const BetaParams interim = beta_posterior(design.prior, {n1, x1});
    if (posterior_prob_statistic(design.hypothesis, interim) > design.thresholds[0]) {
      pet += w1;
      reject_prob += w1;
      continue;
    }
    double stage2 = 0.0;
    for (long x2 = 0; x2 <= n2; ++x2) {
      if (rejects_final[static_cast<std::size_t>(x1 + x2)]) {
        stage2 += binomial_pmf(x2, n2, theta_true);
      }
    }
    reject_prob += w1 * stage2;
  }
  return {reject_prob, pet, static_cast<double>(n1) + (1.0 - pet) * static_cast<double>(n2)};
}

std::optional<double> exact_oc(const DesignSpec& design, double theta_true) {
  return std::visit(
      [&](const auto& d) -> std::optional<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SingleBinaryDesign> ||
                      std::is_same_v<T, BorrowingBinaryDesign>) {
          return exact_oc_binary(d, theta_true);
        } else if constexpr (std::is_same_v<T, GsdBinaryDesign>) {
          if (d.stage_sizes.size() == 2) return exact_oc_gsd(d, theta_true).reject_prob;
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      design);
}

// ---- pre-planning -------------------------------------------------------------

double prior_claim_probability(const BetaParams& prior, long n,
                               const PosteriorProbRule& rule) {
  validate(prior);
  if (n < 1) throw std::invalid_argument("prior_claim_probability: n must be >= 1");
  double total = 0.0;
  for (long x = 0; x <= n; ++x) {
    const BetaParams post = beta_posterior(prior, {n, x});
    if (posterior_prob_test(rule, post).reject) {
      total += beta_binomial_pmf(x, n, prior);
    }
  }
  return total;
}

double prior_claim_probability_mc(const BetaParams& prior, long n,
                                  const PosteriorProbRule& rule,
                                  const SimulationSettings& settings) {
  validate(prior);
  if (n < 1) throw std::invalid_argument("prior_claim_probability: n must be >= 1");
  const auto fn = [&](RngStream& stream) {
    const double theta = sample_beta(prior, stream);
    const long x = sample_binomial(n, theta, stream);
    ReplicationOutcome out;
    out.reject = posterior_prob_test(rule, beta_posterior(prior, {n, x})).reject;
    out.n_enrolled = n;
    return out;
  };
  return estimate_oc(fn, 1, settings).reject_rate;
}

// ---- sample size search ---------------------------------------------------------

SearchResult search_sample_size(const SampleSizeSearchSpec& search,
                                const SingleBinaryDesign& design_template,
                                const SimulationSettings& settings, bool use_exact) {
  if (search.candidates.empty()) {
    throw std::invalid_argument("sample size search: empty candidate list");
  }
  for (std::size_t i = 1; i < search.candidates.size(); ++i) {
    if (search.candidates[i] <= search.candidates[i - 1]) {
      throw std::invalid_argument("sample size search: candidates must ascend");
    }
  }
  validate(search.requirements);
  const double theta_null = scenario_scalar(search.null_scenario);
  const double theta_alt = scenario_scalar(search.alt_scenario);

  SearchResult result;
  for (std::size_t i = 0; i < search.candidates.size(); ++i) {
    SingleBinaryDesign candidate = design_template;
    candidate.n = search.candidates[i];

    CandidateEvaluation eval;
    eval.n = candidate.n;
    eval.exact = use_exact;
    if (use_exact) {
      eval.type1 = exact_oc_binary(candidate, theta_null);
      eval.power = exact_oc_binary(candidate, theta_alt);
      eval.type1_ci = {eval.type1, eval.type1};
      eval.power_ci = {eval.power, eval.power};
    } else {
      SimulationSettings null_settings = settings;
      null_settings.stream_offset =
          settings.stream_offset + 2 * i * static_cast<std::uint64_t>(settings.replications);
      SimulationSettings alt_settings = null_settings;
      alt_settings.stream_offset += static_cast<std::uint64_t>(settings.replications);
      const auto oc0 =
          run_design(candidate, ScenarioSpec{{theta_null}, ScenarioLabel::kNullBoundary},
                     null_settings);
      const auto oc1 = run_design(
          candidate, ScenarioSpec{{theta_alt}, ScenarioLabel::kAlternative}, alt_settings);
      eval.type1 = oc0.reject_rate;
      eval.type1_ci = {oc0.ci_low, oc0.ci_high};
      eval.power = oc1.reject_rate;
      eval.power_ci = {oc1.ci_low, oc1.ci_high};
    }
    eval.meets_requirements = eval.type1 <= search.requirements.alpha &&
                              eval.power >= 1.0 - search.requirements.beta;
    result.evaluations.push_back(eval);
    if (eval.meets_requirements) {
      result.chosen = eval.n;
      break;
    }
  }
  if (!result.chosen) {
    result.message =
        "no candidate met both requirements; widen the candidate set, revisit "
        "the error requirements or decision threshold, or change the fitting prior";
  }
  return result;
}

// ---- multiplicity ---------------------------------------------------------------

std::string to_string(MultiplicityMethod m) {
  switch (m) {
    case MultiplicityMethod::kBhm:
      return "bhm";
    case MultiplicityMethod::kBonferroni:
      return "bonferroni";
    case MultiplicityMethod::kHolm:
      return "holm";
    case MultiplicityMethod::kHochberg:
      return "hochberg";
  }
  return "unknown";
}

MultiplicityReplication simulate_multiplicity_replication(
    const MultiplicityDesign& design, const ScenarioSpec& scenario, int inner_samples,
    RngStream& stream) {
  validate(design);
  const std::size_t k = design.n_endpoints();
  if (scenario.true_params.size() != k) {
    throw std::invalid_argument("scenario must carry one parameter per endpoint");
  }
  if (inner_samples <= 0) {
    throw std::invalid_argument("multiplicity replication needs inner_samples > 0");
  }

  std::vector<long> y(k);
  for (std::size_t i = 0; i < k; ++i) {
    check_probability(scenario.true_params[i], "true theta");
    y[i] = sample_binomial(design.arm_sizes[i], scenario.true_params[i], stream);
  }

  MultiplicityReplication rep;

  BhmConfig cfg = design.bhm;
  cfg.n_samples = inner_samples;
  RngStream analysis = stream.child(1);
  const ChainOutput chain = bhm_posterior(y, design.arm_sizes, cfg, analysis);
  for (std::size_t i = 0; i < k; ++i) {
    const double prob_above = 1.0 - chain.fraction_below(i, design.theta0);
    if (prob_above > design.lambda) {
      rep.rejected[static_cast<std::size_t>(MultiplicityMethod::kBhm)].push_back(i);
    }
  }

  std::vector<double> p_values(k);
  const Hypothesis per_endpoint{design.theta0, Direction::kGreater};
  for (std::size_t i = 0; i < k; ++i) {
    p_values[i] = exact_binomial_pvalue({design.arm_sizes[i], y[i]}, per_endpoint);
  }
  rep.rejected[static_cast<std::size_t>(MultiplicityMethod::kBonferroni)] =
      bonferroni(p_values, design.alpha);
  rep.rejected[static_cast<std::size_t>(MultiplicityMethod::kHolm)] =
      holm(p_values, design.alpha);
  rep.rejected[static_cast<std::size_t>(MultiplicityMethod::kHochberg)] =
      hochberg(p_values, design.alpha);
  return rep;
}

std::array<MultiplicityResult, 4> run_multiplicity(const MultiplicityDesign& design,
                                                   const ScenarioSpec& scenario,
                                                   const SimulationSettings& settings) {
  validate(design);
  const std::size_t k = design.n_endpoints();
  if (scenario.true_params.size() != k) {
    throw std::invalid_argument("scenario must carry one parameter per endpoint");
  }
  if (settings.replications < 1) {
    throw std::invalid_argument("run_multiplicity: replications must be >= 1");
  }
  if (settings.inner_samples <= 0) {
    throw std::invalid_argument(
        "this design needs settings.inner_samples > 0 for the posterior chain");
  }

  struct Tally {
    std::array<long, 4> any{};
    std::array<long, 4> all{};
    std::array<std::vector<long>, 4> per_endpoint;
  };
  const auto make_tally = [&] {
    Tally t;
    for (auto& v : t.per_endpoint) v.assign(k, 0);
    return t;
  };

  Tally total = make_tally();
  std::mutex merge_mutex;
  std::atomic<long> next{0};
  std::exception_ptr failure;

  unsigned workers = settings.parallelism > 0
                         ? static_cast<unsigned>(settings.parallelism)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(settings.replications));

  const auto worker = [&] {
    Tally local = make_tally();
    try {
      for (;;) {
        const long r = next.fetch_add(1, std::memory_order_relaxed);
        if (r >= settings.replications) break;
        RngStream stream(settings.master_seed,
                         settings.stream_offset + static_cast<std::uint64_t>(r));
        const MultiplicityReplication rep = simulate_multiplicity_replication(
            design, scenario, settings.inner_samples, stream);
        for (std::size_t m = 0; m < 4; ++m) {
          const auto& set = rep.rejected[m];
          if (!set.empty()) ++local.any[m];
          if (set.size() == k) ++local.all[m];
          for (std::size_t i : set) ++local.per_endpoint[m][i];
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      return;
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    for (std::size_t m = 0; m < 4; ++m) {
      total.any[m] += local.any[m];
      total.all[m] += local.all[m];
      for (std::size_t i = 0; i < k; ++i) {
        total.per_endpoint[m][i] += local.per_endpoint[m][i];
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::array<MultiplicityResult, 4> results;
  const auto r = static_cast<double>(settings.replications);
  for (std::size_t m = 0; m < 4; ++m) {
    results[m].any_count = total.any[m];
    results[m].all_count = total.all[m];
    results[m].replications = settings.replications;
    results[m].reject_any = static_cast<double>(total.any[m]) / r;
    results[m].reject_all = static_cast<double>(total.all[m]) / r;
    results[m].per_endpoint.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      results[m].per_endpoint[i] = static_cast<double>(total.per_endpoint[m][i]) / r;
    }
  }
  return results;
}

}  // namespace trialsim
