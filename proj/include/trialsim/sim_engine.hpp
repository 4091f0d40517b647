#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "trialsim/rng.hpp"

namespace trialsim {

struct SimulationSettings {
  long replications = 10000;
  // Posterior draws per replication for designs whose test statistic needs
  // MCMC; ignored by conjugate designs.
  int inner_samples = 0;
  std::uint64_t master_seed = 0;
  // Worker count hint; 0 picks the hardware concurrency. The estimate is
  // bit-identical for any worker count.
  int parallelism = 1;
  // Stream index of replication 0; grid sweeps offset this so that every
  // grid point runs on disjoint streams.
  std::uint64_t stream_offset = 0;
};

struct Interval {
  double low;
  double high;
};

// 95% Wilson score interval for a binomial proportion.
Interval wilson_ci(long successes, long trials);

struct OperatingCharacteristics {
  double reject_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Set for staged designs only.
  std::optional<double> pet;
  std::optional<double> expected_n;
  std::vector<long> per_stage_rejects;
  long rejections = 0;
  long replications = 0;
};

// What a single simulated trial decided.
struct ReplicationOutcome {
  bool reject = false;
  bool stopped_early = false;
  int decision_stage = 1;  // 1-based stage at which the decision landed
  long n_enrolled = 0;
};

using ReplicationFn = std::function<ReplicationOutcome(RngStream&)>;

// Runs settings.replications independent trials; replication r draws from
// RngStream(master_seed, stream_offset + r). Aggregation is exact integer
// counting, so the result does not depend on the number of workers.
OperatingCharacteristics estimate_oc(const ReplicationFn& replication, int n_stages,
                                     const SimulationSettings& settings);

struct PowerCurve {
  std::vector<double> grid;
  std::vector<OperatingCharacteristics> estimates;
};

// estimate_oc at every grid point; point i runs on stream offset
// i * replications so the sweep decomposes into independent streams and the
// first point coincides with a direct estimate_oc call.
PowerCurve power_curve(const std::function<ReplicationFn(double)>& replication_at,
                       int n_stages, const std::vector<double>& grid,
                       const SimulationSettings& settings);

}  // namespace trialsim
