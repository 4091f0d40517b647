#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trialsim/designs.hpp"

namespace trialsim {

// Raised on malformed or inconsistent configuration; the CLI maps it to
// exit code 2. what() carries the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct OutputSpec {
  enum class Format { kCsv, kJson };
  Format format = Format::kCsv;
  std::string path;  // empty writes to stdout
};

struct PriorClaimSpec {
  std::vector<BetaParams> priors;
  long n = 150;
  PosteriorProbRule rule{{0.12, Direction::kLess}, 0.975};
  bool monte_carlo = false;
};

struct BorrowSweepSpec {
  std::vector<double> a0_grid;
  std::vector<long> n_grid;
};

// One parsed configuration document. The design block is shared by every
// command; command-specific sections are optional and validated by the
// command that consumes them.
struct RunConfig {
  DesignSpec design;
  std::vector<ScenarioSpec> scenarios;
  SimulationSettings settings;
  OutputSpec output;

  std::optional<SampleSizeSearchSpec> search;
  std::vector<double> grid;
  std::optional<PriorClaimSpec> prior_claim;
  std::optional<std::vector<double>> p_values;
  std::optional<BorrowSweepSpec> sweep;
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

std::string to_string(ScenarioLabel label);

}  // namespace trialsim
