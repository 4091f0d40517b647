#include "trialsim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace trialsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw ConfigError("config field '" + where + "': " + msg);
}

const json& member(const json& j, const std::string& where, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing");
  return *it;
}

double as_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double num(const json& j, const std::string& where, const std::string& key) {
  return as_double(member(j, where, key), where + "." + key);
}

double num_or(const json& j, const std::string& where, const std::string& key,
              double fallback) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : as_double(*it, where + "." + key);
}

long integer(const json& j, const std::string& where, const std::string& key) {
  const json& v = member(j, where, key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<long>();
}

long integer_or(const json& j, const std::string& where, const std::string& key,
                long fallback) {
  if (j.find(key) == j.end()) return fallback;
  return integer(j, where, key);
}

std::string text_or(const json& j, const std::string& where, const std::string& key,
                    const std::string& fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) fail(where + "." + key, "expected a string");
  return it->get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_double(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<long> integer_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of integers");
  std::vector<long> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) {
      fail(where + "[" + std::to_string(i) + "]", "expected an integer");
    }
    out.push_back(j[i].get<long>());
  }
  return out;
}

BetaParams beta_params(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected {alpha, beta}");
  return {num(j, where, "alpha"), num(j, where, "beta")};
}

GammaParams gamma_params(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected {shape, rate}");
  return {num(j, where, "shape"), num(j, where, "rate")};
}

Direction direction(const json& j, const std::string& where) {
  const std::string s = j.get<std::string>();
  if (s == "less") return Direction::kLess;
  if (s == "greater") return Direction::kGreater;
  fail(where, "expected 'less' or 'greater'");
}

Hypothesis hypothesis_or(const json& j, const std::string& where, Hypothesis fallback) {
  const auto it = j.find("hypothesis");
  if (it == j.end()) return fallback;
  const std::string w = where + ".hypothesis";
  Hypothesis h = fallback;
  h.theta0 = num(*it, w, "theta0");
  if (it->find("direction") != it->end()) {
    h.direction = direction((*it)["direction"], w + ".direction");
  }
  return h;
}

DesignSpec parse_design(const json& j) {
  const std::string where = "design";
  if (!j.is_object()) fail(where, "expected an object");
  const std::string variant = member(j, where, "variant").get<std::string>();

  if (variant == "single_binary") {
    SingleBinaryDesign d;
    d.n = integer(j, where, "n");
    if (j.contains("prior")) d.prior = beta_params(j["prior"], where + ".prior");
    d.hypothesis = hypothesis_or(j, where, d.hypothesis);
    d.lambda = num_or(j, where, "lambda", d.lambda);
    d.alpha = num_or(j, where, "alpha", d.alpha);
    const std::string test = text_or(j, where, "test", "posterior_prob");
    if (test == "posterior_prob") {
      d.test = SingleBinaryDesign::Test::kPosteriorProb;
    } else if (test == "z_test") {
      d.test = SingleBinaryDesign::Test::kZTest;
    } else {
      fail(where + ".test", "expected 'posterior_prob' or 'z_test'");
    }
    return d;
  }
  if (variant == "gsd_binary") {
    GsdBinaryDesign d;
    d.stage_sizes = integer_list(member(j, where, "stage_sizes"), where + ".stage_sizes");
    d.thresholds = number_list(member(j, where, "thresholds"), where + ".thresholds");
    if (j.contains("prior")) d.prior = beta_params(j["prior"], where + ".prior");
    d.hypothesis = hypothesis_or(j, where, d.hypothesis);
    return d;
  }
  if (variant == "borrowing_binary") {
    BorrowingBinaryDesign d;
    d.n = integer(j, where, "n");
    const json& pilot = member(j, where, "pilot");
    d.pilot = {integer(pilot, where + ".pilot", "n0"), integer(pilot, where + ".pilot", "x0")};
    d.a0 = num(j, where, "a0");
    if (j.contains("initial")) d.initial = beta_params(j["initial"], where + ".initial");
    d.hypothesis = hypothesis_or(j, where, d.hypothesis);
    d.lambda = num_or(j, where, "lambda", d.lambda);
    return d;
  }
  if (variant == "futility_survival") {
    FutilitySurvivalDesign d;
    d.n = integer_or(j, where, "n", d.n);
    d.n1 = integer_or(j, where, "n1", d.n1);
    d.gamma1 = num_or(j, where, "gamma1", d.gamma1);
    if (j.contains("hazard_prior")) {
      d.hazard_prior = gamma_params(j["hazard_prior"], where + ".hazard_prior");
    }
    if (j.contains("layout")) {
      const json& lay = j["layout"];
      const std::string w = where + ".layout";
      d.unit_layout.cutpoints = number_list(member(lay, w, "cutpoints"), w + ".cutpoints");
      d.unit_layout.rates = number_list(member(lay, w, "rates"), w + ".rates");
      d.unit_layout.horizon = num(lay, w, "horizon");
    }
    if (j.contains("final_rule")) {
      const json& fr = j["final_rule"];
      const std::string w = where + ".final_rule";
      d.final_rule.t_eval = num_or(fr, w, "t_eval", d.final_rule.t_eval);
      d.final_rule.bound = num_or(fr, w, "bound", d.final_rule.bound);
      d.final_rule.z = num_or(fr, w, "z", d.final_rule.z);
      const std::string transform = text_or(fr, w, "transform", "log_log");
      if (transform == "log_log") {
        d.final_rule.transform = GreenwoodRule::Transform::kLogLog;
      } else if (transform == "plain") {
        d.final_rule.transform = GreenwoodRule::Transform::kPlain;
      } else {
        fail(w + ".transform", "expected 'log_log' or 'plain'");
      }
    }
    d.predictive_draws =
        static_cast<int>(integer_or(j, where, "predictive_draws", d.predictive_draws));
    return d;
  }
  if (variant == "tdf") {
    TdfDesign d;
    d.n = integer(j, where, "n");
    d.lambda = num_or(j, where, "lambda", d.lambda);
    d.hypothesis = hypothesis_or(j, where, d.hypothesis);
    if (j.contains("ess")) {
      const json& e = j["ess"];
      const std::string w = where + ".ess";
      d.ess.prior_mean = num_or(e, w, "prior_mean", d.ess.prior_mean);
      d.ess.prior_sd = num_or(e, w, "prior_sd", d.ess.prior_sd);
      d.ess.burn_in = static_cast<int>(integer_or(e, w, "burn_in", d.ess.burn_in));
    }
    return d;
  }
  if (variant == "multiplicity") {
    MultiplicityDesign d;
    d.arm_sizes = integer_list(member(j, where, "arm_sizes"), where + ".arm_sizes");
    d.theta0 = num_or(j, where, "theta0", d.theta0);
    d.lambda = num_or(j, where, "lambda", d.lambda);
    d.alpha = num_or(j, where, "alpha", d.alpha);
    if (j.contains("bhm")) {
      const json& b = j["bhm"];
      const std::string w = where + ".bhm";
      d.bhm.nu = num_or(b, w, "nu", d.bhm.nu);
      d.bhm.omega = num_or(b, w, "omega", d.bhm.omega);
      d.bhm.a = num_or(b, w, "a", d.bhm.a);
      d.bhm.b = num_or(b, w, "b", d.bhm.b);
      d.bhm.burn_in = static_cast<int>(integer_or(b, w, "burn_in", d.bhm.burn_in));
    }
    return d;
  }
  fail(where + ".variant", "unknown design variant '" + variant + "'");
}

ScenarioSpec parse_scenario(const json& j, const std::string& where) {
  ScenarioSpec s;
  s.true_params = number_list(member(j, where, "true_params"), where + ".true_params");
  const std::string label = text_or(j, where, "label", "custom");
  if (label == "null_boundary") {
    s.label = ScenarioLabel::kNullBoundary;
  } else if (label == "alternative") {
    s.label = ScenarioLabel::kAlternative;
  } else if (label == "custom") {
    s.label = ScenarioLabel::kCustom;
  } else {
    fail(where + ".label", "expected 'null_boundary', 'alternative', or 'custom'");
  }
  return s;
}

}  // namespace

std::string to_string(ScenarioLabel label) {
  switch (label) {
    case ScenarioLabel::kNullBoundary: return "null_boundary";
    case ScenarioLabel::kAlternative: return "alternative";
    case ScenarioLabel::kCustom: return "custom";
  }
  return "custom";
}

RunConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("top level must be an object");

  RunConfig cfg;
  cfg.design = parse_design(member(j, "", "design"));

  if (j.contains("scenarios")) {
    const json& sc = j["scenarios"];
    if (!sc.is_array() || sc.empty()) fail("scenarios", "expected a nonempty array");
    for (std::size_t i = 0; i < sc.size(); ++i) {
      cfg.scenarios.push_back(
          parse_scenario(sc[i], "scenarios[" + std::to_string(i) + "]"));
    }
  }

  if (j.contains("settings")) {
    const json& s = j["settings"];
    const std::string w = "settings";
    cfg.settings.replications = integer_or(s, w, "replications", cfg.settings.replications);
    cfg.settings.inner_samples =
        static_cast<int>(integer_or(s, w, "inner_samples", cfg.settings.inner_samples));
    if (s.contains("master_seed")) {
      if (!s["master_seed"].is_number_unsigned() && !s["master_seed"].is_number_integer()) {
        fail(w + ".master_seed", "expected an integer");
      }
      cfg.settings.master_seed = s["master_seed"].get<std::uint64_t>();
    }
    cfg.settings.parallelism =
        static_cast<int>(integer_or(s, w, "threads", cfg.settings.parallelism));
    if (cfg.settings.replications < 1) fail(w + ".replications", "must be >= 1");
    if (cfg.settings.parallelism < 0) fail(w + ".threads", "must be >= 0");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    const std::string format = text_or(o, "output", "format", "csv");
    if (format == "csv") {
      cfg.output.format = OutputSpec::Format::kCsv;
    } else if (format == "json") {
      cfg.output.format = OutputSpec::Format::kJson;
    } else {
      fail("output.format", "expected 'csv' or 'json'");
    }
    cfg.output.path = text_or(o, "output", "path", "");
  }

  if (j.contains("search")) {
    const json& s = j["search"];
    const std::string w = "search";
    SampleSizeSearchSpec search;
    search.candidates = integer_list(member(s, w, "candidates"), w + ".candidates");
    search.requirements = {num(s, w, "alpha"), num(s, w, "beta")};
    search.null_scenario = {{num(s, w, "theta_null")}, ScenarioLabel::kNullBoundary};
    search.alt_scenario = {{num(s, w, "theta_alt")}, ScenarioLabel::kAlternative};
    cfg.search = std::move(search);
  }

  if (j.contains("grid")) {
    cfg.grid = number_list(j["grid"], "grid");
  }

  if (j.contains("prior_claim")) {
    const json& p = j["prior_claim"];
    const std::string w = "prior_claim";
    PriorClaimSpec claim;
    const json& priors = member(p, w, "priors");
    if (!priors.is_array() || priors.empty()) fail(w + ".priors", "expected a nonempty array");
    for (std::size_t i = 0; i < priors.size(); ++i) {
      claim.priors.push_back(
          beta_params(priors[i], w + ".priors[" + std::to_string(i) + "]"));
    }
    claim.n = integer(p, w, "n");
    claim.rule.hypothesis.theta0 = num_or(p, w, "theta0", claim.rule.hypothesis.theta0);
    if (p.contains("direction")) {
      claim.rule.hypothesis.direction = direction(p["direction"], w + ".direction");
    }
    claim.rule.lambda = num_or(p, w, "lambda", claim.rule.lambda);
    if (p.contains("monte_carlo")) {
      if (!p["monte_carlo"].is_boolean()) fail(w + ".monte_carlo", "expected a boolean");
      claim.monte_carlo = p["monte_carlo"].get<bool>();
    }
    cfg.prior_claim = std::move(claim);
  }

  if (j.contains("p_values")) {
    cfg.p_values = number_list(j["p_values"], "p_values");
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    const std::string w = "sweep";
    BorrowSweepSpec sweep;
    sweep.a0_grid = number_list(member(s, w, "a0_grid"), w + ".a0_grid");
    sweep.n_grid = integer_list(member(s, w, "n_grid"), w + ".n_grid");
    cfg.sweep = std::move(sweep);
  }

  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace trialsim
