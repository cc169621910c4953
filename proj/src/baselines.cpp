#include "batchts/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "batchts/policies.hpp"

namespace batchts {

void EliminationConfig::validate() const {
  if (num_rounds < 1) throw UsageError("elimination num_rounds must be >= 1");
  if (!(confidence_scale > 0.0)) throw UsageError("confidence_scale must be positive");
}

namespace {

// Sequential policies record one batch per pull.
class SequentialRecorder {
 public:
  SequentialRecorder(const BanditInstance& instance, std::int64_t horizon)
      : instance_(instance), horizon_(horizon) {
    if (horizon < 1) throw UsageError("horizon must be positive");
    batches_.reserve(static_cast<std::size_t>(horizon));
  }

  void pull(int arm, RandomStream& rng, std::vector<ArmStats>& stats) {
    const std::int64_t reward = draw_reward(instance_, arm, rng);
    stats[arm] = update_stats(stats[arm], reward, 1);
    BatchRecord record;
    record.batch_index = static_cast<int>(batches_.size()) + 1;
    record.start_time = time_;
    record.entries.push_back({arm, 1, reward});
    batches_.push_back(std::move(record));
    ++time_;
  }

  std::int64_t time() const { return time_; }

  RunTrace finish(std::span<const std::int64_t> checkpoint_times) {
    RunTrace trace{instance_, std::move(batches_), {}};
    trace.checkpoints = regret_curve(instance_, trace.batches, checkpoint_times);
    return trace;
  }

 private:
  BanditInstance instance_;
  std::int64_t horizon_;
  std::int64_t time_ = 0;
  std::vector<BatchRecord> batches_;
};

}  // namespace

RunTrace thompson_beta_run(const BanditInstance& instance, std::int64_t horizon,
                           RandomStream& rng, std::span<const std::int64_t> checkpoint_times) {
  if (horizon < 1) throw UsageError("horizon must be positive");
  validate_checkpoints(checkpoint_times, horizon);
  const int num_arms = instance.num_arms();
  std::vector<ArmStats> stats(num_arms);
  SequentialRecorder recorder(instance, horizon);
  while (recorder.time() < horizon) {
    int best = 0;
    double best_sample = -1.0;
    for (int arm = 0; arm < num_arms; ++arm) {
      const auto& s = stats[arm];
      const double sample = rng.beta(static_cast<double>(s.successes) + 1.0,
                                     static_cast<double>(s.pulls - s.successes) + 1.0);
      if (sample > best_sample) {
        best_sample = sample;
        best = arm;
      }
    }
    recorder.pull(best, rng, stats);
  }
  return recorder.finish(checkpoint_times);
}

RunTrace ucb1_run(const BanditInstance& instance, std::int64_t horizon,
                  RandomStream& rng, std::span<const std::int64_t> checkpoint_times) {
  const int num_arms = instance.num_arms();
  if (horizon < num_arms) throw UsageError("ucb1 requires horizon >= number of arms");
  validate_checkpoints(checkpoint_times, horizon);
  std::vector<ArmStats> stats(num_arms);
  SequentialRecorder recorder(instance, horizon);
  for (int arm = 0; arm < num_arms && recorder.time() < horizon; ++arm) {
    recorder.pull(arm, rng, stats);
  }
  while (recorder.time() < horizon) {
    const double t = static_cast<double>(recorder.time() + 1);
    int best = 0;
    double best_index = -1.0;
    for (int arm = 0; arm < num_arms; ++arm) {
      const auto& s = stats[arm];
      const double index =
          s.empirical_mean() + std::sqrt(2.0 * std::log(t) / static_cast<double>(s.pulls));
      if (index > best_index) {  // strict: ties stay with the lower arm
        best_index = index;
        best = arm;
      }
    }
    recorder.pull(best, rng, stats);
  }
  return recorder.finish(checkpoint_times);
}

namespace {

// Pull boundaries for the elimination baseline. The geometric grid mirrors
// the instance-dependent policy's growth (batch r adds ~|survivors|*g^r
// pulls); the minimax grid reuses the instance-independent boundaries.
struct EliminationDriver {
  const BanditInstance& instance;
  std::int64_t horizon;
  EliminationConfig config;

  std::int64_t next_boundary(int round, std::int64_t elapsed, std::size_t survivors,
                             const std::vector<std::int64_t>& grid) const {
    if (round + 1 >= config.num_rounds) return horizon;  // last round finishes the run
    if (config.grid_kind == GridKind::geometric) {
      const double growth = btsd_growth_factor(horizon, config.num_rounds);
      const double raw = static_cast<double>(survivors) *
                         std::pow(growth, static_cast<double>(round + 1));
      if (raw >= static_cast<double>(horizon - elapsed)) return horizon;
      return std::min(horizon, elapsed + static_cast<std::int64_t>(std::ceil(raw)));
    }
    const auto it = std::upper_bound(grid.begin(), grid.end(), elapsed);
    return (it == grid.end()) ? horizon : *it;
  }
};

}  // namespace

RunTrace batched_elimination_run(const BanditInstance& instance, std::int64_t horizon,
                                 const EliminationConfig& config, RandomStream& rng,
                                 std::span<const std::int64_t> checkpoint_times) {
  const int num_arms = instance.num_arms();
  if (horizon < num_arms) throw UsageError("elimination requires horizon >= number of arms");
  config.validate();
  validate_checkpoints(checkpoint_times, horizon);

  std::vector<std::int64_t> grid;
  if (config.grid_kind == GridKind::minimax && horizon > num_arms) {
    grid = btsi_pull_grid(horizon, num_arms, config.num_rounds);
  }

  std::vector<int> surviving(num_arms);
  std::iota(surviving.begin(), surviving.end(), 0);
  std::vector<ArmStats> stats(num_arms);
  RunTrace trace{instance, {}, {}};
  EliminationDriver driver{instance, horizon, config};
  std::int64_t elapsed = 0;
  int round = 0;
  const double log_term = std::log(2.0 * num_arms * static_cast<double>(horizon));

  // Initialization batch: one pull per arm.
  {
    BatchRecord record;
    record.batch_index = 1;
    record.start_time = 0;
    record.surviving = surviving;
    for (int arm = 0; arm < num_arms; ++arm) {
      const std::int64_t reward = draw_reward(instance, arm, rng);
      stats[arm] = update_stats(stats[arm], reward, 1);
      record.entries.push_back({arm, 1, reward});
    }
    elapsed = num_arms;
    trace.batches.push_back(std::move(record));
  }

  while (elapsed < horizon) {
    std::int64_t boundary;
    if (surviving.size() == 1) {
      boundary = horizon;  // single batch finishes the run
    } else {
      boundary = driver.next_boundary(round, elapsed, surviving.size(), grid);
      if (boundary <= elapsed) boundary = horizon;
    }
    const std::int64_t length = boundary - elapsed;
    const Eigen::Index n = static_cast<Eigen::Index>(surviving.size());
    const auto pulls = apportion_largest_remainder(
        Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n)), length);

    BatchRecord record;
    record.batch_index = static_cast<int>(trace.batches.size()) + 1;
    record.start_time = elapsed;
    record.surviving = surviving;
    for (std::size_t k = 0; k < surviving.size(); ++k) {
      const int arm = surviving[k];
      std::int64_t wins = 0;
      for (std::int64_t p = 0; p < pulls[k]; ++p) wins += draw_reward(instance, arm, rng);
      stats[arm] = update_stats(stats[arm], wins, pulls[k]);
      record.entries.push_back({arm, pulls[k], wins});
    }
    elapsed += length;
    ++round;
    trace.batches.push_back(std::move(record));

    if (surviving.size() > 1 && elapsed < horizon) {
      double best_mean = -std::numeric_limits<double>::infinity();
      for (int arm : surviving) best_mean = std::max(best_mean, stats[arm].empirical_mean());
      std::vector<int> kept;
      for (int arm : surviving) {
        const double radius = config.confidence_scale *
                              std::sqrt(log_term / (2.0 * static_cast<double>(stats[arm].pulls)));
        if (best_mean - stats[arm].empirical_mean() < 2.0 * radius) kept.push_back(arm);
      }
      surviving = std::move(kept);  // the empirically best arm always stays
    }
  }

  trace.checkpoints = regret_curve(instance, trace.batches, checkpoint_times);
  return trace;
}

RunTrace improved_ucb_run(const BanditInstance& instance, std::int64_t horizon,
                          const ImprovedUcbConfig& config, RandomStream& rng,
                          std::span<const std::int64_t> checkpoint_times) {
  const int num_arms = instance.num_arms();
  if (horizon < num_arms) throw UsageError("improved-ucb requires horizon >= number of arms");
  validate_checkpoints(checkpoint_times, horizon);

  std::vector<int> surviving(num_arms);
  std::iota(surviving.begin(), surviving.end(), 0);
  std::vector<ArmStats> stats(num_arms);
  RunTrace trace{instance, {}, {}};
  std::int64_t elapsed = 0;
  std::int64_t target = 0;  // per-arm pulls required by the end of the round
  int round = 0;

  while (elapsed < horizon) {
    const double gap = std::pow(0.5, round);  // presumed gap 2^-m
    const double log_term = std::log(static_cast<double>(horizon) * gap * gap);
    std::int64_t desired =
        static_cast<std::int64_t>(std::ceil(config.pull_scale * log_term / (gap * gap)));
    desired = std::max(desired, target + 1);  // always make progress

    BatchRecord record;
    record.batch_index = static_cast<int>(trace.batches.size()) + 1;
    record.start_time = elapsed;
    record.surviving = surviving;
    std::int64_t budget = horizon - elapsed;
    const bool single = surviving.size() == 1;
    for (std::size_t k = 0; k < surviving.size(); ++k) {
      const int arm = surviving[k];
      std::int64_t want = single ? budget : std::min(desired - stats[arm].pulls, budget);
      want = std::max<std::int64_t>(want, 0);
      std::int64_t wins = 0;
      for (std::int64_t p = 0; p < want; ++p) wins += draw_reward(instance, arm, rng);
      stats[arm] = update_stats(stats[arm], wins, want);
      budget -= want;
      if (want > 0) record.entries.push_back({arm, want, wins});
    }
    elapsed = horizon - budget;
    if (!record.entries.empty()) trace.batches.push_back(std::move(record));
    target = desired;
    ++round;

    if (surviving.size() > 1 && elapsed < horizon) {
      const double radius = config.radius_scale *
                            std::sqrt(std::max(log_term, 0.0) /
                                      (2.0 * static_cast<double>(desired)));
      double best_lower = -std::numeric_limits<double>::infinity();
      for (int arm : surviving) {
        best_lower = std::max(best_lower, stats[arm].empirical_mean() - radius);
      }
      std::vector<int> kept;
      for (int arm : surviving) {
        if (stats[arm].empirical_mean() + radius >= best_lower) kept.push_back(arm);
      }
      surviving = std::move(kept);
    }
  }

  trace.checkpoints = regret_curve(instance, trace.batches, checkpoint_times);
  return trace;
}

}  // namespace batchts
