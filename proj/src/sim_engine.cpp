#include "trialsim/sim_engine.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace trialsim {

namespace {

constexpr double kZ95 = 1.959963984540054;

struct Tally {
  long rejections = 0;
  long early_stops = 0;
  long enrolled_sum = 0;
  std::vector<long> stage_rejects;

  explicit Tally(int n_stages) : stage_rejects(static_cast<std::size_t>(n_stages), 0) {}

  void add(const ReplicationOutcome& r) {
    if (r.reject) {
      ++rejections;
      ++stage_rejects[static_cast<std::size_t>(r.decision_stage - 1)];
    }
    if (r.stopped_early) ++early_stops;
    enrolled_sum += r.n_enrolled;
  }

  void merge(const Tally& other) {
    rejections += other.rejections;
    early_stops += other.early_stops;
    enrolled_sum += other.enrolled_sum;
    for (std::size_t i = 0; i < stage_rejects.size(); ++i) {
      stage_rejects[i] += other.stage_rejects[i];
    }
  }
};

}  // namespace

Interval wilson_ci(long successes, long trials) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_ci: need 0 <= successes <= trials, trials > 0");
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // degenerate counts anchor the interval at the exact boundary
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

OperatingCharacteristics estimate_oc(const ReplicationFn& replication, int n_stages,
                                     const SimulationSettings& settings) {
  if (settings.replications < 1) {
    throw std::invalid_argument("estimate_oc: replications must be >= 1");
  }
  if (n_stages < 1) throw std::invalid_argument("estimate_oc: n_stages must be >= 1");

  unsigned workers = settings.parallelism > 0
                         ? static_cast<unsigned>(settings.parallelism)
                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(settings.replications));

  Tally total(n_stages);
  std::mutex merge_mutex;
  std::atomic<long> next{0};
  std::exception_ptr failure;

  const auto worker = [&] {
    Tally local(n_stages);
    try {
      for (;;) {
        const long r = next.fetch_add(1, std::memory_order_relaxed);
        if (r >= settings.replications) break;
        RngStream stream(settings.master_seed,
                         settings.stream_offset + static_cast<std::uint64_t>(r));
        local.add(replication(stream));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      return;
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    total.merge(local);
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

  OperatingCharacteristics oc;
  oc.replications = settings.replications;
  oc.rejections = total.rejections;
  oc.reject_rate =
      static_cast<double>(total.rejections) / static_cast<double>(settings.replications);
  const Interval ci = wilson_ci(total.rejections, settings.replications);
  oc.ci_low = ci.low;
  oc.ci_high = ci.high;
  oc.per_stage_rejects = total.stage_rejects;
  if (n_stages > 1) {
    oc.pet = static_cast<double>(total.early_stops) /
             static_cast<double>(settings.replications);
    oc.expected_n = static_cast<double>(total.enrolled_sum) /
                    static_cast<double>(settings.replications);
  }
  return oc;
}

PowerCurve power_curve(const std::function<ReplicationFn(double)>& replication_at,
                       int n_stages, const std::vector<double>& grid,
                       const SimulationSettings& settings) {
  if (grid.empty()) throw std::invalid_argument("power_curve: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("power_curve: grid must be strictly ascending");
    }
  }
  PowerCurve curve;
  curve.grid = grid;
  curve.estimates.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SimulationSettings point = settings;
    point.stream_offset =
        settings.stream_offset +
        static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(settings.replications);
    curve.estimates.push_back(estimate_oc(replication_at(grid[i]), n_stages, point));
  }
  return curve;
}

}  // namespace trialsim
