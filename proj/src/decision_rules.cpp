#include "trialsim/decision_rules.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trialsim {

TestOutcome posterior_prob_test(const PosteriorProbRule& rule,
                                const BetaParams& posterior) {
  if (!(rule.lambda >= 0.0 && rule.lambda <= 1.0)) {
    throw std::invalid_argument("posterior probability threshold outside [0,1]");
  }
  const double lower_tail = beta_cdf(rule.hypothesis.theta0, posterior);
  const double statistic =
      rule.hypothesis.direction == Direction::kLess ? lower_tail : 1.0 - lower_tail;
  return {statistic, statistic > rule.lambda};
}

namespace {

void check_binary_goal(const Hypothesis& hypothesis, const char* what) {
  if (!(hypothesis.theta0 > 0.0 && hypothesis.theta0 < 1.0)) {
    throw std::invalid_argument(std::string(what) +
                                ": performance goal must lie in (0,1)");
  }
}

}  // namespace

TestOutcome z_test(const BinaryDataset& data, const Hypothesis& hypothesis,
                   double alpha) {
  validate(data);
  if (data.n == 0) throw std::invalid_argument("z_test: empty dataset");
  check_binary_goal(hypothesis, "z_test");
  const double theta0 = hypothesis.theta0;
  const double z = (static_cast<double>(data.x) / data.n - theta0) /
                   std::sqrt(theta0 * (1.0 - theta0) / data.n);
  const double p = hypothesis.direction == Direction::kLess ? normal_cdf(z)
                                                            : 1.0 - normal_cdf(z);
  return {p, p < alpha};
}

double exact_binomial_pvalue(const BinaryDataset& data, const Hypothesis& hypothesis) {
  validate(data);
  if (data.n == 0) throw std::invalid_argument("exact_binomial_pvalue: empty dataset");
  check_binary_goal(hypothesis, "exact_binomial_pvalue");
  if (hypothesis.direction == Direction::kGreater) {
    return binomial_upper_tail(data.x, data.n, hypothesis.theta0);
  }
  return binomial_lower_tail(data.x, data.n, hypothesis.theta0);
}

TestOutcome greenwood_test(const SurvivalDataset& data, const GreenwoodRule& rule) {
  if (data.records.empty()) throw std::invalid_argument("greenwood_test: empty dataset");

  std::vector<SurvivalRecord> sorted(data.records);
  std::sort(sorted.begin(), sorted.end(),
            [](const SurvivalRecord& a, const SurvivalRecord& b) {
              return a.time < b.time || (a.time == b.time && a.event && !b.event);
            });

  // Walk distinct event times up to t_eval; ties grouped at identical
  // doubles. Records censored at an event time stay in the risk set there.
  double surv = 1.0;
  double greenwood_sum = 0.0;
  bool hit_zero = false;
  const std::size_t n = sorted.size();
  std::size_t i = 0;
  while (i < n && sorted[i].time <= rule.t_eval) {
    if (!sorted[i].event) {
      ++i;
      continue;
    }
    const double t = sorted[i].time;
    const auto at_risk = static_cast<double>(n - i);
    std::size_t ties = 0;
    while (i < n && sorted[i].time == t && sorted[i].event) {
      ++ties;
      ++i;
    }
    const auto d = static_cast<double>(ties);
    if (d >= at_risk) {
      hit_zero = true;  // estimate reaches 0; the interval collapses
      surv = 0.0;
      break;
    }
    surv *= 1.0 - d / at_risk;
    greenwood_sum += d / (at_risk * (at_risk - d));
  }

  double lower_bound;
  if (hit_zero || surv <= 0.0) {
    lower_bound = 0.0;
  } else if (greenwood_sum == 0.0) {
    lower_bound = surv;  // no events: zero variance, bound collapses to S
  } else if (rule.transform == GreenwoodRule::Transform::kPlain) {
    lower_bound = surv - rule.z * surv * std::sqrt(greenwood_sum);
  } else {
    const double sigma = std::sqrt(greenwood_sum) / std::fabs(std::log(surv));
    lower_bound = std::pow(surv, std::exp(rule.z * sigma));
  }
  return {lower_bound, lower_bound > rule.bound};
}

double predictive_prob_binary(
    const BetaParams& interim_posterior, const BinaryDataset& interim_data,
    long future_n, int draws,
    const std::function<bool(const BinaryDataset&)>& final_rejects,
    RngStream& rng) {
  validate(interim_posterior);
  validate(interim_data);
  if (future_n < 0) throw std::invalid_argument("predictive_prob: future_n < 0");
  if (future_n == 0) return final_rejects(interim_data) ? 1.0 : 0.0;
  if (draws <= 0) throw std::invalid_argument("predictive_prob: draws must be positive");

  long hits = 0;
  for (int d = 0; d < draws; ++d) {
    const double theta = sample_beta(interim_posterior, rng);
    const long x2 = sample_binomial(future_n, theta, rng);
    const BinaryDataset combined{interim_data.n + future_n, interim_data.x + x2};
    if (final_rejects(combined)) ++hits;
  }
  return static_cast<double>(hits) / draws;
}

double predictive_prob_survival(const std::vector<GammaParams>& interim_posterior,
                                const SurvivalDataset& interim_data,
                                const PiecewiseHazard& layout, long future_n,
                                int draws, const GreenwoodRule& final_rule,
                                RngStream& rng) {
  validate(layout);
  if (interim_posterior.size() != layout.n_intervals()) {
    throw std::invalid_argument("predictive_prob: posterior/layout size mismatch");
  }
  if (future_n < 0) throw std::invalid_argument("predictive_prob: future_n < 0");
  if (future_n == 0) return greenwood_test(interim_data, final_rule).reject ? 1.0 : 0.0;
  if (draws <= 0) throw std::invalid_argument("predictive_prob: draws must be positive");

  long hits = 0;
  SurvivalDataset combined;
  for (int d = 0; d < draws; ++d) {
    PiecewiseHazard h = layout;
    for (std::size_t j = 0; j < h.rates.size(); ++j) {
      h.rates[j] = sample_gamma(interim_posterior[j], rng);
    }
    combined.records = interim_data.records;
    combined.records.reserve(interim_data.records.size() + future_n);
    for (long i = 0; i < future_n; ++i) {
      const EventTime et = sample_event_time(h, rng);
      combined.records.push_back({et.time, et.event});
    }
    if (greenwood_test(combined, final_rule).reject) ++hits;
  }
  return static_cast<double>(hits) / draws;
}

namespace {

void check_pvalues(const std::vector<double>& p) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("p-values must lie in [0,1]");
    }
  }
}

std::vector<std::size_t> order_by_value(const std::vector<double>& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return order;
}

}  // namespace

std::vector<std::size_t> bonferroni(const std::vector<double>& p_values, double alpha) {
  check_pvalues(p_values);
  const double cut = alpha / static_cast<double>(p_values.size());
  std::vector<std::size_t> rejected;
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (p_values[i] < cut) rejected.push_back(i);
  }
  return rejected;
}

std::vector<std::size_t> holm(const std::vector<double>& p_values, double alpha) {
  check_pvalues(p_values);
  const std::size_t k = p_values.size();
  const auto order = order_by_value(p_values);
  std::vector<std::size_t> rejected;
  for (std::size_t step = 0; step < k; ++step) {
    if (p_values[order[step]] < alpha / static_cast<double>(k - step)) {
      rejected.push_back(order[step]);
    } else {
      break;  // step-down stops at the first non-significant result
    }
  }
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

std::vector<std::size_t> hochberg(const std::vector<double>& p_values, double alpha) {
  check_pvalues(p_values);
  const std::size_t k = p_values.size();
  const auto order = order_by_value(p_values);
  std::vector<std::size_t> rejected;
  for (std::size_t j = k; j-- > 0;) {  // largest p-value first
    if (p_values[order[j]] < alpha / static_cast<double>(k - j)) {
      rejected.assign(order.begin(), order.begin() + j + 1);
      break;
    }
  }
  std::sort(rejected.begin(), rejected.end());
  return rejected;
}

}  // namespace trialsim
