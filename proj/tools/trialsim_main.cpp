// Command-line front end: parses a JSON run configuration, drives the
// simulation library, and writes operating-characteristic tables as CSV or
// JSON. Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 sample-size search exhausted without a qualifying candidate.
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "trialsim/config.hpp"
#include "trialsim/designs.hpp"
#include "trialsim/table_io.hpp"

namespace {

using namespace trialsim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSearchNotFound = 3;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> replications;
  std::optional<int> threads;
  std::optional<std::string> format;
  std::optional<std::string> output_path;
  bool exact = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration")
      ->required();
  cmd->add_option("--seed", opts.seed, "override settings.master_seed")
      ->envname("TRIALSIM_SEED");
  cmd->add_option("--replications", opts.replications, "override settings.replications");
  cmd->add_option("--threads", opts.threads, "override settings.threads (0 = auto)")
      ->envname("TRIALSIM_THREADS");
  cmd->add_option("--format", opts.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--output", opts.output_path, "output file (default from config, else stdout)");
  cmd->add_flag("--exact", opts.exact, "prefer the enumeration oracle where available");
}

RunConfig load_with_overrides(const CommonOptions& opts) {
  RunConfig cfg = load_config_file(opts.config_path);
  if (opts.seed) cfg.settings.master_seed = *opts.seed;
  if (opts.replications) {
    if (*opts.replications < 1) throw ConfigError("--replications must be >= 1");
    cfg.settings.replications = *opts.replications;
  }
  if (opts.threads) {
    if (*opts.threads < 0) throw ConfigError("--threads must be >= 0");
    cfg.settings.parallelism = *opts.threads;
  }
  if (opts.format) {
    cfg.output.format =
        *opts.format == "json" ? OutputSpec::Format::kJson : OutputSpec::Format::kCsv;
  }
  if (opts.output_path) cfg.output.path = *opts.output_path;
  return cfg;
}

void write_table(const TableWriter& table, const OutputSpec& output) {
  std::ostringstream buffer;
  if (output.format == OutputSpec::Format::kJson) {
    table.write_json(buffer);
  } else {
    table.write_csv(buffer);
  }
  if (output.path.empty()) {
    std::cout << buffer.str();
    return;
  }
  std::ofstream out(output.path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + output.path + "'");
  out << buffer.str();
}

std::string variant_name(const DesignSpec& design) {
  struct Namer {
    std::string operator()(const SingleBinaryDesign&) const { return "single_binary"; }
    std::string operator()(const GsdBinaryDesign&) const { return "gsd_binary"; }
    std::string operator()(const BorrowingBinaryDesign&) const { return "borrowing_binary"; }
    std::string operator()(const FutilitySurvivalDesign&) const { return "futility_survival"; }
    std::string operator()(const TdfDesign&) const { return "tdf"; }
    std::string operator()(const MultiplicityDesign&) const { return "multiplicity"; }
  };
  return std::visit(Namer{}, design);
}

long design_total_n(const DesignSpec& design) {
  struct Total {
    long operator()(const SingleBinaryDesign& d) const { return d.n; }
    long operator()(const GsdBinaryDesign& d) const { return d.total_n(); }
    long operator()(const BorrowingBinaryDesign& d) const { return d.n; }
    long operator()(const FutilitySurvivalDesign& d) const { return d.n; }
    long operator()(const TdfDesign& d) const { return d.n; }
    long operator()(const MultiplicityDesign& d) const {
      long total = 0;
      for (long n : d.arm_sizes) total += n;
      return total;
    }
  };
  return std::visit(Total{}, design);
}

std::string joined_params(const std::vector<double>& params) {
  std::ostringstream out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) out << ';';
    out << cell_num(params[i], 4).text;
  }
  return out.str();
}

void require_scenarios(const RunConfig& cfg) {
  if (cfg.scenarios.empty()) {
    throw ConfigError("this command needs at least one entry in 'scenarios'");
  }
}

int cmd_oc(const CommonOptions& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  require_scenarios(cfg);

  TableWriter table({"variant", "scenario", "true_params", "n_total", "reject_rate",
                     "ci_low", "ci_high", "pet", "expected_n", "exact_reject",
                     "master_seed", "replications"});
  for (const auto& scenario : cfg.scenarios) {
    const OperatingCharacteristics oc = run_design(cfg.design, scenario, cfg.settings);
    std::optional<double> exact;
    if (scenario.true_params.size() == 1) {
      exact = exact_oc(cfg.design, scenario.true_params.front());
    }
    table.add_row({cell_str(variant_name(cfg.design)),
                   cell_str(to_string(scenario.label)),
                   cell_str(joined_params(scenario.true_params)),
                   cell_int(design_total_n(cfg.design)),
                   cell_num(oc.reject_rate),
                   cell_num(oc.ci_low),
                   cell_num(oc.ci_high),
                   oc.pet ? cell_num(*oc.pet) : cell_empty(),
                   oc.expected_n ? cell_num(*oc.expected_n, 2) : cell_empty(),
                   exact ? cell_num(*exact) : cell_empty(),
                   cell_int(static_cast<long>(cfg.settings.master_seed)),
                   cell_int(cfg.settings.replications)});
  }
  write_table(table, cfg.output);
  return kExitOk;
}

int cmd_search_n(const CommonOptions& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  if (!cfg.search) throw ConfigError("missing 'search' section");
  const auto* design = std::get_if<SingleBinaryDesign>(&cfg.design);
  if (design == nullptr) {
    throw ConfigError("sample-size search expects a single_binary design template");
  }

  const SearchResult result =
      search_sample_size(*cfg.search, *design, cfg.settings, opts.exact);

  TableWriter table({"n", "type1", "type1_ci_low", "type1_ci_high", "power",
                     "power_ci_low", "power_ci_high", "exact", "meets_requirements",
                     "master_seed", "replications"});
  for (const auto& eval : result.evaluations) {
    table.add_row({cell_int(eval.n), cell_num(eval.type1), cell_num(eval.type1_ci.low),
                   cell_num(eval.type1_ci.high), cell_num(eval.power),
                   cell_num(eval.power_ci.low), cell_num(eval.power_ci.high),
                   cell_str(eval.exact ? "yes" : "no"),
                   cell_str(eval.meets_requirements ? "yes" : "no"),
                   cell_int(static_cast<long>(cfg.settings.master_seed)),
                   cell_int(eval.exact ? 0 : cfg.settings.replications)});
  }
  write_table(table, cfg.output);
  if (result.chosen) {
    std::cerr << "selected sample size: " << *result.chosen << "\n";
    return kExitOk;
  }
  std::cerr << result.message << "\n";
  return kExitSearchNotFound;
}

int cmd_power_curve(const CommonOptions& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  if (cfg.grid.empty()) throw ConfigError("missing nonempty 'grid' section");

  const PowerCurve curve = design_power_curve(cfg.design, cfg.grid, cfg.settings);
  TableWriter table({"theta", "estimate", "ci_low", "ci_high", "n", "master_seed",
                     "replications"});
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const auto& oc = curve.estimates[i];
    table.add_row({cell_num(curve.grid[i]), cell_num(oc.reject_rate), cell_num(oc.ci_low),
                   cell_num(oc.ci_high), cell_int(design_total_n(cfg.design)),
                   cell_int(static_cast<long>(cfg.settings.master_seed)),
                   cell_int(cfg.settings.replications)});
  }
  write_table(table, cfg.output);
  return kExitOk;
}

int cmd_prior_claim(const CommonOptions& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  if (!cfg.prior_claim) throw ConfigError("missing 'prior_claim' section");
  const PriorClaimSpec& spec = *cfg.prior_claim;

  TableWriter table({"prior_alpha", "prior_beta", "n", "claim_probability", "method",
                     "master_seed", "replications"});
  for (const auto& prior : spec.priors) {
    const bool monte_carlo = spec.monte_carlo && !opts.exact;
    const double value =
        monte_carlo
            ? prior_claim_probability_mc(prior, spec.n, spec.rule, cfg.settings)
            : prior_claim_probability(prior, spec.n, spec.rule);
    table.add_row({cell_num(prior.alpha), cell_num(prior.beta), cell_int(spec.n),
                   cell_num(value), cell_str(monte_carlo ? "monte_carlo" : "exact"),
                   cell_int(static_cast<long>(cfg.settings.master_seed)),
                   cell_int(monte_carlo ? cfg.settings.replications : 0)});
  }
  write_table(table, cfg.output);
  return kExitOk;
}

int cmd_multiplicity(const CommonOptions& opts) {
  const RunConfig cfg = load_with_overrides(opts);

  if (cfg.p_values) {
    // Fixed p-vector mode: apply the procedures to supplied p-values and
    // report 1-based endpoint indices.
    const auto* design = std::get_if<MultiplicityDesign>(&cfg.design);
    const double alpha = design != nullptr ? design->alpha : 0.025;
    TableWriter table({"method", "rejected_endpoints", "alpha"});
    const auto row = [&](const std::string& name, const std::vector<std::size_t>& set) {
      std::ostringstream joined;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (i > 0) joined << ';';
        joined << (set[i] + 1);
      }
      table.add_row({cell_str(name), cell_str(joined.str()), cell_num(alpha)});
    };
    row("bonferroni", bonferroni(*cfg.p_values, alpha));
    row("holm", holm(*cfg.p_values, alpha));
    row("hochberg", hochberg(*cfg.p_values, alpha));
    write_table(table, cfg.output);
    return kExitOk;
  }

  require_scenarios(cfg);
  const auto* design = std::get_if<MultiplicityDesign>(&cfg.design);
  if (design == nullptr) throw ConfigError("expected a multiplicity design");

  TableWriter table({"method", "scenario", "true_params", "k", "reject_any",
                     "reject_all", "per_endpoint", "master_seed", "replications",
                     "inner_samples"});
  for (const auto& scenario : cfg.scenarios) {
    const auto results = run_multiplicity(*design, scenario, cfg.settings);
    for (const MultiplicityMethod method : kAllMultiplicityMethods) {
      const auto& res = results[static_cast<std::size_t>(method)];
      table.add_row({cell_str(to_string(method)), cell_str(to_string(scenario.label)),
                     cell_str(joined_params(scenario.true_params)),
                     cell_int(static_cast<long>(design->n_endpoints())),
                     cell_num(res.reject_any), cell_num(res.reject_all),
                     cell_str(joined_params(res.per_endpoint)),
                     cell_int(static_cast<long>(cfg.settings.master_seed)),
                     cell_int(cfg.settings.replications),
                     cell_int(cfg.settings.inner_samples)});
    }
  }
  write_table(table, cfg.output);
  return kExitOk;
}

int cmd_borrow_sweep(const CommonOptions& opts) {
  const RunConfig cfg = load_with_overrides(opts);
  if (!cfg.sweep) throw ConfigError("missing 'sweep' section");
  require_scenarios(cfg);
  const auto* base = std::get_if<BorrowingBinaryDesign>(&cfg.design);
  if (base == nullptr) throw ConfigError("borrow-sweep expects a borrowing_binary design");

  TableWriter table({"a0", "n", "scenario", "theta", "reject_rate", "ci_low", "ci_high",
                     "exact_reject", "master_seed", "replications"});
  std::uint64_t offset = 0;
  for (long n : cfg.sweep->n_grid) {
    for (double a0 : cfg.sweep->a0_grid) {
      BorrowingBinaryDesign design = *base;
      design.n = n;
      design.a0 = a0;
      for (const auto& scenario : cfg.scenarios) {
        const double theta = scenario.true_params.at(0);
        const double exact = exact_oc_binary(design, theta);
        Cell estimate = cell_empty();
        Cell ci_low = cell_empty();
        Cell ci_high = cell_empty();
        long replications = 0;
        if (!opts.exact) {
          SimulationSettings settings = cfg.settings;
          settings.stream_offset = offset;
          offset += static_cast<std::uint64_t>(cfg.settings.replications);
          const auto oc = run_design(design, scenario, settings);
          estimate = cell_num(oc.reject_rate);
          ci_low = cell_num(oc.ci_low);
          ci_high = cell_num(oc.ci_high);
          replications = cfg.settings.replications;
        }
        table.add_row({cell_num(a0, 2), cell_int(n), cell_str(to_string(scenario.label)),
                       cell_num(theta), estimate, ci_low, ci_high, cell_num(exact),
                       cell_int(static_cast<long>(cfg.settings.master_seed)),
                       cell_int(replications)});
      }
    }
  }
  write_table(table, cfg.output);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequentist operating characteristics of Bayesian trial designs"};
  app.require_subcommand(1);

  CommonOptions oc_opts, search_opts, curve_opts, claim_opts, multi_opts, sweep_opts;
  CLI::App* oc = app.add_subcommand("oc", "operating characteristics per scenario");
  add_common(oc, oc_opts);
  CLI::App* search = app.add_subcommand("search-n", "Bayesian sample size search");
  add_common(search, search_opts);
  CLI::App* curve = app.add_subcommand("power-curve", "rejection rate over a theta grid");
  add_common(curve, curve_opts);
  CLI::App* claim = app.add_subcommand("prior-claim", "prior probability of the study claim");
  add_common(claim, claim_opts);
  CLI::App* multi = app.add_subcommand("multiplicity", "endpoint-family adjustments");
  add_common(multi, multi_opts);
  CLI::App* sweep = app.add_subcommand("borrow-sweep", "power-prior a0/N sweep");
  add_common(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (oc->parsed()) return cmd_oc(oc_opts);
    if (search->parsed()) return cmd_search_n(search_opts);
    if (curve->parsed()) return cmd_power_curve(curve_opts);
    if (claim->parsed()) return cmd_prior_claim(claim_opts);
    if (multi->parsed()) return cmd_multiplicity(multi_opts);
    if (sweep->parsed()) return cmd_borrow_sweep(sweep_opts);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
