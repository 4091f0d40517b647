#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "trialsim/designs.hpp"

using namespace trialsim;

namespace {

SingleBinaryDesign table1_design(long n, BetaParams prior) {
  SingleBinaryDesign d;
  d.n = n;
  d.prior = prior;
  return d;  // theta0 = 0.12 (less), lambda = 0.975 defaults
}

constexpr double kTheta0 = 0.12;
constexpr double kThetaA = 0.05;

}  // namespace

TEST_CASE("single binary design decisions at specific counts") {
  const auto d = table1_design(150, {1.0, 1.0});
  CHECK(!d.rejects_at(28));  // 28/150 is far above the goal
  CHECK(d.rejects_at(0));

  // boundary of the monotone rejection region found by scan
  long x_crit = -1;
  for (long x = 0; x <= d.n; ++x) {
    if (d.rejects_at(x)) x_crit = x;
  }
  REQUIRE(x_crit >= 0);
  CHECK(d.rejects_at(x_crit));
  CHECK(!d.rejects_at(x_crit + 1));
  for (long x = 0; x <= x_crit; ++x) CHECK(d.rejects_at(x));
}

TEST_CASE("exact single-stage operating characteristics reproduce the reference") {
  // non-informative prior
  CHECK(std::fabs(exact_oc_binary(table1_design(150, {1.0, 1.0}), kTheta0) - 0.0231) <
        0.005);
  CHECK(std::fabs(exact_oc_binary(table1_design(150, {1.0, 1.0}), kThetaA) - 0.8690) <
        0.005);
  // optimistic prior inflates the type I error
  CHECK(std::fabs(exact_oc_binary(table1_design(150, {0.8, 16.0}), kTheta0) - 0.0448) <
        0.005);
  // pessimistic prior deflates it
  CHECK(std::fabs(exact_oc_binary(table1_design(150, {3.5, 20.0}), kTheta0) - 0.0114) <
        0.005);

  SingleBinaryDesign degenerate = table1_design(150, {1.0, 1.0});
  degenerate.lambda = 1.0;
  CHECK(exact_oc_binary(degenerate, kTheta0) == 0.0);
}

TEST_CASE("monte carlo estimate agrees with the enumeration oracle") {
  const auto d = table1_design(150, {1.0, 1.0});
  SimulationSettings settings;
  settings.replications = 10000;
  settings.master_seed = 2024;
  const auto oc =
      run_design(d, ScenarioSpec{{kTheta0}, ScenarioLabel::kNullBoundary}, settings);
  const double exact = exact_oc_binary(d, kTheta0);
  const double se = testutil::proportion_se(exact, settings.replications);
  CHECK(std::fabs(oc.reject_rate - exact) < 3.0 * se);
  CHECK(!oc.pet.has_value());

  SingleBinaryDesign never = d;
  never.lambda = 1.0;
  const auto zero =
      run_design(never, ScenarioSpec{{kTheta0}, ScenarioLabel::kNullBoundary}, settings);
  CHECK(zero.rejections == 0);
}

TEST_CASE("z-test design matches its enumerated cells") {
  SingleBinaryDesign z = table1_design(150, {1.0, 1.0});
  z.test = SingleBinaryDesign::Test::kZTest;
  CHECK(std::fabs(exact_oc_binary(z, kTheta0) - 0.0242) < 0.005);
  z.n = 200;
  CHECK(std::fabs(exact_oc_binary(z, kThetaA) - 0.9231) < 0.005);
}

namespace {
GsdBinaryDesign two_stage(long n1, long n2) {
  GsdBinaryDesign d;
  d.stage_sizes = {n1, n2};
  d.thresholds = {0.996, 0.978};
  return d;
}
}  // namespace

TEST_CASE("two-stage design reproduces the reference row exactly enumerated") {
  const auto d = two_stage(81, 81);
  const GsdExact null_oc = exact_oc_gsd(d, kTheta0);
  CHECK(std::fabs(null_oc.reject_prob - 0.0228) < 0.005);
  const GsdExact alt_oc = exact_oc_gsd(d, kThetaA);
  CHECK(std::fabs(alt_oc.reject_prob - 0.8862) < 0.012);
  CHECK(std::fabs(alt_oc.pet - 0.2202) < 0.02);

  const GsdExact en_row = exact_oc_gsd(two_stage(49, 113), kThetaA);
  CHECK(std::fabs(en_row.expected_n - 153.0) < 2.0);
}

TEST_CASE("gsd PET at the null is the stage-one rejection mass") {
  const auto d = two_stage(81, 81);
  const GsdExact oc = exact_oc_gsd(d, kTheta0);
  double direct = 0.0;
  for (long x1 = 0; x1 <= 81; ++x1) {
    const BetaParams post = beta_posterior(d.prior, {81, x1});
    if (posterior_prob_test({d.hypothesis, d.thresholds[0]}, post).reject) {
      direct += binomial_pmf(x1, 81, kTheta0);
    }
  }
  CHECK(oc.pet == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("a never-stopping first stage reduces to the single-stage design") {
  GsdBinaryDesign d = two_stage(81, 81);
  d.thresholds[0] = 1.0;
  const GsdExact gsd = exact_oc_gsd(d, kTheta0);
  SingleBinaryDesign single = table1_design(162, {1.0, 1.0});
  single.lambda = d.thresholds[1];
  CHECK(gsd.reject_prob == doctest::Approx(exact_oc_binary(single, kTheta0)).epsilon(1e-12));
  CHECK(gsd.pet == 0.0);

  // per-replication reduction with common streams
  SimulationSettings settings;
  settings.replications = 300;
  settings.master_seed = 7;
  const auto fn_gsd = make_replication_fn(
      DesignSpec{d}, ScenarioSpec{{kTheta0}, ScenarioLabel::kNullBoundary}, settings);
  const auto fn_single = make_replication_fn(
      DesignSpec{single}, ScenarioSpec{{kTheta0}, ScenarioLabel::kNullBoundary}, settings);
  for (long r = 0; r < settings.replications; ++r) {
    RngStream s1(settings.master_seed, static_cast<std::uint64_t>(r));
    RngStream s2(settings.master_seed, static_cast<std::uint64_t>(r));
    CHECK(fn_gsd(s1).reject == fn_single(s2).reject);
  }
}

TEST_CASE("gsd monte carlo agrees with exact enumeration within 3 SE") {
  const auto d = two_stage(81, 81);
  SimulationSettings settings;
  settings.replications = 10000;
  settings.master_seed = 99;
  const auto oc =
      run_design(d, ScenarioSpec{{kThetaA}, ScenarioLabel::kAlternative}, settings);
  const GsdExact exact = exact_oc_gsd(d, kThetaA);
  CHECK(std::fabs(oc.reject_rate - exact.reject_prob) <
        3.0 * testutil::proportion_se(exact.reject_prob, settings.replications));
  REQUIRE(oc.pet.has_value());
  CHECK(std::fabs(*oc.pet - exact.pet) <
        3.0 * testutil::proportion_se(exact.pet, settings.replications));
  // E(N) = N1 + (1-PET)N2 exactly, from counted stopping events
  CHECK(*oc.expected_n == doctest::Approx(81.0 + (1.0 - *oc.pet) * 81.0).epsilon(1e-12));
}

TEST_CASE("borrowing design equals the no-borrowing baseline at a0 = 0") {
  BorrowingBinaryDesign borrow;
  borrow.n = 150;
  borrow.pilot = {100, 5};
  borrow.a0 = 0.0;
  CHECK(std::fabs(exact_oc_binary(borrow, kTheta0) - 0.0225) < 0.003);
  CHECK(std::fabs(exact_oc_binary(borrow, kThetaA) - 0.8681) < 0.003);

  SingleBinaryDesign baseline = table1_design(150, {0.01, 0.01});
  SimulationSettings settings;
  settings.replications = 2000;
  settings.master_seed = 11;
  const ScenarioSpec scenario{{kTheta0}, ScenarioLabel::kNullBoundary};
  const auto oc_borrow = run_design(DesignSpec{borrow}, scenario, settings);
  const auto oc_base = run_design(DesignSpec{baseline}, scenario, settings);
  CHECK(oc_borrow.rejections == oc_base.rejections);
}

TEST_CASE("borrowing monotonicity in the weight, exact") {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  BorrowingBinaryDesign d;
  d.n = 150;

  d.pilot = {100, 5};  // favorable pilot
  double prev_t1 = -1.0, prev_pw = -1.0;
  for (const double a0 : grid) {
    d.a0 = a0;
    const double t1 = exact_oc_binary(d, kTheta0);
    const double pw = exact_oc_binary(d, kThetaA);
    CHECK(t1 >= prev_t1);
    CHECK(pw >= prev_pw);
    prev_t1 = t1;
    prev_pw = pw;
  }

  d.pilot = {100, 15};  // unfavorable pilot
  prev_t1 = 2.0;
  prev_pw = 2.0;
  for (const double a0 : grid) {
    d.a0 = a0;
    const double t1 = exact_oc_binary(d, kTheta0);
    const double pw = exact_oc_binary(d, kThetaA);
    CHECK(t1 <= prev_t1);
    CHECK(pw <= prev_pw);
    prev_t1 = t1;
    prev_pw = pw;
  }
}

TEST_CASE("prior claim probability: frozen oracle values at n = 100") {
  // Cross-checked against an independent quadrature/enumeration oracle.
  const PosteriorProbRule rule{{kTheta0, Direction::kLess}, 0.975};
  CHECK(prior_claim_probability({1.0, 1.0}, 100, rule) ==
        doctest::Approx(0.0594).epsilon(0.002));
  CHECK(prior_claim_probability({1.0, 9.0}, 100, rule) ==
        doctest::Approx(0.4628).epsilon(0.002));
  CHECK(prior_claim_probability({1.0, 19.0}, 100, rule) ==
        doctest::Approx(0.7627).epsilon(0.002));
  CHECK(prior_claim_probability({1.0, 49.0}, 100, rule) ==
        doctest::Approx(0.9897).epsilon(0.002));

  const PosteriorProbRule degenerate{{kTheta0, Direction::kLess}, 1.0};
  CHECK(prior_claim_probability({1.0, 1.0}, 150, degenerate) == 0.0);

  SimulationSettings settings;
  settings.replications = 20000;
  settings.master_seed = 3;
  const double exact = prior_claim_probability({1.0, 9.0}, 100, rule);
  const double mc = prior_claim_probability_mc({1.0, 9.0}, 100, rule, settings);
  CHECK(std::fabs(mc - exact) < 3.0 * testutil::proportion_se(exact, settings.replications));
}

TEST_CASE("sample size search walks candidates in order") {
  SampleSizeSearchSpec spec;
  spec.candidates = {100, 150, 200};
  spec.requirements = {0.025, 0.2};
  spec.null_scenario = {{kTheta0}, ScenarioLabel::kNullBoundary};
  spec.alt_scenario = {{kThetaA}, ScenarioLabel::kAlternative};

  SimulationSettings settings;
  settings.replications = 10000;
  settings.master_seed = 17;

  const auto exact_res = search_sample_size(spec, table1_design(0, {1.0, 1.0}),
                                            settings, /*use_exact=*/true);
  REQUIRE(exact_res.chosen.has_value());
  CHECK(*exact_res.chosen == 150);
  CHECK(exact_res.evaluations.size() == 2);  // stop at the first success
  CHECK(!exact_res.evaluations[0].meets_requirements);

  const auto mc_res = search_sample_size(spec, table1_design(0, {1.0, 1.0}),
                                         settings, /*use_exact=*/false);
  REQUIRE(mc_res.chosen.has_value());
  CHECK(*mc_res.chosen == 150);

  // optimistic prior inflates type I at every candidate: nothing qualifies
  const auto not_found = search_sample_size(spec, table1_design(0, {0.8, 16.0}),
                                            settings, /*use_exact=*/true);
  CHECK(!not_found.chosen.has_value());
  CHECK(not_found.evaluations.size() == 3);
  CHECK(!not_found.message.empty());

  // vacuous requirements pick the first candidate
  SampleSizeSearchSpec vacuous = spec;
  vacuous.requirements = {1.0, 1.0};
  const auto first = search_sample_size(vacuous, table1_design(0, {1.0, 1.0}),
                                        settings, /*use_exact=*/true);
  REQUIRE(first.chosen.has_value());
  CHECK(*first.chosen == 100);

  SampleSizeSearchSpec bad = spec;
  bad.candidates = {200, 150};
  CHECK_THROWS_AS((void)search_sample_size(bad, table1_design(0, {1.0, 1.0}), settings,
                                           true),
                  std::invalid_argument);
}

TEST_CASE("futility design with a zero threshold is the single-stage test, per seed") {
  FutilitySurvivalDesign with_stop;
  with_stop.gamma1 = 0.0;
  FutilitySurvivalDesign single = with_stop;

  SimulationSettings settings;
  settings.replications = 60;
  settings.master_seed = 5150;
  const ScenarioSpec scenario{{0.6}, ScenarioLabel::kCustom};
  const auto fn = make_replication_fn(DesignSpec{with_stop}, scenario, settings);
  for (long r = 0; r < settings.replications; ++r) {
    RngStream s(settings.master_seed, static_cast<std::uint64_t>(r));
    const auto out = fn(s);
    CHECK(!out.stopped_early);
    CHECK(out.n_enrolled == 100);
  }
}

TEST_CASE("futility stopping never rejects and shortens enrollment") {
  FutilitySurvivalDesign d;
  d.predictive_draws = 200;
  SimulationSettings settings;
  settings.replications = 200;
  settings.master_seed = 61;
  const auto oc =
      run_design(DesignSpec{d}, ScenarioSpec{{0.5}, ScenarioLabel::kNullBoundary}, settings);
  REQUIRE(oc.pet.has_value());
  CHECK(*oc.pet > 0.1);  // null scenario stops often
  CHECK(oc.per_stage_rejects[0] == 0);
  CHECK(*oc.expected_n ==
        doctest::Approx(30.0 + (1.0 - *oc.pet) * 70.0).epsilon(1e-12));
}

TEST_CASE("futility design reproduces the later reference row") {
  FutilitySurvivalDesign d;
  d.n1 = 50;
  d.gamma1 = 0.10;
  SimulationSettings settings;
  settings.replications = 2000;
  settings.master_seed = 4096;
  settings.parallelism = 2;
  const auto oc =
      run_design(DesignSpec{d}, ScenarioSpec{{0.7}, ScenarioLabel::kAlternative}, settings);
  CHECK(std::fabs(oc.reject_rate - 0.969) < 0.015);
}

TEST_CASE("tdf power ordering in theta and dominance in n") {
  SimulationSettings settings;
  settings.replications = 300;
  settings.inner_samples = 500;
  settings.master_seed = 1660;
  settings.parallelism = 2;

  TdfDesign d100;
  d100.n = 100;
  const PowerCurve c100 = design_power_curve(DesignSpec{d100}, {2.0, 4.0}, settings);
  TdfDesign d500;
  d500.n = 500;
  const PowerCurve c500 = design_power_curve(DesignSpec{d500}, {2.0, 4.0}, settings);

  const double se = testutil::proportion_se(0.5, settings.replications);
  // farther from the boundary is easier to detect
  CHECK(c100.estimates[0].reject_rate > c100.estimates[1].reject_rate - 3.0 * se);
  CHECK(c500.estimates[0].reject_rate > c500.estimates[1].reject_rate - 3.0 * se);
  // a larger trial dominates pointwise below the boundary
  CHECK(c500.estimates[0].reject_rate > c100.estimates[0].reject_rate - 3.0 * se);
  CHECK(c500.estimates[1].reject_rate > c100.estimates[1].reject_rate - 3.0 * se);
}

TEST_CASE("tdf design needs inner samples and otherwise runs") {
  TdfDesign d;
  d.n = 30;
  SimulationSettings settings;
  settings.replications = 10;
  settings.master_seed = 4;
  const ScenarioSpec scenario{{5.0}, ScenarioLabel::kNullBoundary};
  CHECK_THROWS_AS((void)run_design(DesignSpec{d}, scenario, settings),
                  std::invalid_argument);

  settings.inner_samples = 300;
  const auto oc = run_design(DesignSpec{d}, scenario, settings);
  CHECK(oc.reject_rate >= 0.0);
  CHECK(oc.reject_rate <= 1.0);
}

TEST_CASE("multiplicity replication: reduction at K = 1 and nesting in general") {
  MultiplicityDesign d;
  d.arm_sizes = {100};
  d.bhm.burn_in = 300;
  const ScenarioSpec null_scenario{{0.35}, ScenarioLabel::kNullBoundary};
  for (long r = 0; r < 30; ++r) {
    RngStream s(777, static_cast<std::uint64_t>(r));
    const auto rep = simulate_multiplicity_replication(d, null_scenario, 500, s);
    CHECK(rep.set(MultiplicityMethod::kBonferroni) == rep.set(MultiplicityMethod::kHolm));
    CHECK(rep.set(MultiplicityMethod::kHolm) == rep.set(MultiplicityMethod::kHochberg));
  }

  MultiplicityDesign d5;
  d5.arm_sizes = {100, 100, 100, 100, 100};
  d5.bhm.burn_in = 300;
  const ScenarioSpec alt{{0.5, 0.5, 0.5, 0.5, 0.5}, ScenarioLabel::kAlternative};
  for (long r = 0; r < 15; ++r) {
    RngStream s(778, static_cast<std::uint64_t>(r));
    const auto rep = simulate_multiplicity_replication(d5, alt, 500, s);
    const auto& bon = rep.set(MultiplicityMethod::kBonferroni);
    const auto& hol = rep.set(MultiplicityMethod::kHolm);
    const auto& hoc = rep.set(MultiplicityMethod::kHochberg);
    for (const auto i : bon) CHECK(std::count(hol.begin(), hol.end(), i) == 1);
    for (const auto i : hol) CHECK(std::count(hoc.begin(), hoc.end(), i) == 1);
  }
}

TEST_CASE("run_multiplicity aggregates per-method rates coherently") {
  MultiplicityDesign d;
  d.arm_sizes = {80, 80};
  d.bhm.burn_in = 300;
  SimulationSettings settings;
  settings.replications = 60;
  settings.inner_samples = 400;
  settings.master_seed = 31;
  const auto results =
      run_multiplicity(d, ScenarioSpec{{0.5, 0.5}, ScenarioLabel::kAlternative}, settings);
  for (const auto& res : results) {
    CHECK(res.reject_all <= res.reject_any);
    CHECK(res.replications == 60);
    REQUIRE(res.per_endpoint.size() == 2);
    for (const double rate : res.per_endpoint) {
      CHECK(rate >= res.reject_all);
      CHECK(rate <= res.reject_any);
    }
  }
  // K = 1: familywise rate equals the per-endpoint rate
  MultiplicityDesign single;
  single.arm_sizes = {100};
  single.bhm.burn_in = 300;
  const auto reduced = run_multiplicity(
      single, ScenarioSpec{{0.35}, ScenarioLabel::kNullBoundary}, settings);
  for (const auto& res : reduced) {
    CHECK(res.reject_any == doctest::Approx(res.per_endpoint[0]));
    CHECK(res.reject_any == doctest::Approx(res.reject_all));
  }
}

TEST_CASE("design and scenario dimensions are validated") {
  SimulationSettings settings;
  settings.replications = 10;
  const auto d = table1_design(150, {1.0, 1.0});
  CHECK_THROWS_AS(
      (void)run_design(DesignSpec{d}, ScenarioSpec{{0.1, 0.2}, ScenarioLabel::kCustom},
                       settings),
      std::invalid_argument);
  MultiplicityDesign m;
  m.arm_sizes = {100, 100};
  settings.inner_samples = 100;
  CHECK_THROWS_AS(
      (void)run_multiplicity(m, ScenarioSpec{{0.35}, ScenarioLabel::kCustom}, settings),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)run_design(DesignSpec{m}, ScenarioSpec{{0.35, 0.35}, ScenarioLabel::kCustom},
                       settings),
      std::invalid_argument);
}
