#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "batchts/common.hpp"
#include "batchts/rng.hpp"

namespace batchts {

/// Ground-truth Bernoulli bandit: arm i pays 1 with probability means()[i].
/// Immutable after construction.
class BanditInstance {
 public:
  BanditInstance(std::string name, Eigen::ArrayXd means);

  const std::string& name() const { return name_; }
  const Eigen::ArrayXd& means() const { return means_; }
  int num_arms() const { return static_cast<int>(means_.size()); }
  double mean(int arm) const { return means_[check_arm(arm)]; }
  double best_mean() const { return best_mean_; }
  int best_arm() const { return best_arm_; }

  /// Per-arm suboptimality gaps, best_mean() - means(); zero for the best arm.
  const Eigen::ArrayXd& gaps() const { return gaps_; }
  double gap(int arm) const { return gaps_[check_arm(arm)]; }

  int check_arm(int arm) const;

 private:
  std::string name_;
  Eigen::ArrayXd means_;
  Eigen::ArrayXd gaps_;
  double best_mean_ = 0.0;
  int best_arm_ = 0;
};

/// Pull count and reward tally for one arm. Successes are kept as integers
/// so the empirical mean is an exact rational at any point.
struct ArmStats {
  std::int64_t pulls = 0;
  std::int64_t successes = 0;

  double empirical_mean() const {
    return pulls == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(pulls);
  }
};

/// Folds a batch of outcomes into the tally. successes must lie in [0, pulls].
ArmStats update_stats(ArmStats stats, std::int64_t successes, std::int64_t pulls);

/// Per-arm slice of one batch: how many pulls the batch gave the arm and how
/// many paid out.
struct ArmOutcome {
  int arm = 0;
  std::int64_t pulls = 0;
  std::int64_t successes = 0;
};

/// One batch of a run: its allocation and observed outcomes, fixed before any
/// of the batch's rewards were seen.
struct BatchRecord {
  int batch_index = 0;           // 1-based
  std::int64_t start_time = 0;   // total pulls before this batch
  std::vector<int> surviving;    // arms eligible when the batch was planned;
                                 // empty means "all arms" (sequential policies)
  std::vector<ArmOutcome> entries;  // ascending by arm

  std::int64_t length() const;
};

struct Checkpoint {
  std::int64_t time = 0;
  double regret = 0.0;
};

/// Complete record of one replication: the instance played, every batch, and
/// the cumulative pseudo-regret sampled on the checkpoint grid.
struct RunTrace {
  BanditInstance instance;
  std::vector<BatchRecord> batches;
  std::vector<Checkpoint> checkpoints;

  std::int64_t total_pulls() const;
  std::int64_t num_batches() const { return static_cast<std::int64_t>(batches.size()); }
  double final_regret() const { return checkpoints.empty() ? 0.0 : checkpoints.back().regret; }

  /// Total pulls per arm across all batches.
  std::vector<std::int64_t> allocation() const;
};

/// Samples one Bernoulli reward for the arm; consumes exactly one draw.
int draw_reward(const BanditInstance& instance, int arm, RandomStream& rng);

/// Gap-weighted cost of an allocation: sum_i counts[i] * gap_i.
/// counts may be shorter than the arm count; missing entries are zero.
double pseudo_regret(const BanditInstance& instance, std::span<const std::int64_t> counts);
double pseudo_regret(const BanditInstance& instance, std::span<const ArmOutcome> entries);

/// Default checkpoint grid: powers of ten up to the horizon, plus the horizon.
std::vector<std::int64_t> default_checkpoints(std::int64_t horizon);

/// Must be sorted, positive, bounded by the horizon, and end exactly at it.
void validate_checkpoints(std::span<const std::int64_t> checkpoints, std::int64_t horizon);

/// Cumulative pseudo-regret at each checkpoint time, computed exactly from
/// the batch sequence (within a batch, pulls run over arms in ascending
/// index, so regret is piecewise linear in a known order).
std::vector<Checkpoint> regret_curve(const BanditInstance& instance,
                                     std::span<const BatchRecord> batches,
                                     std::span<const std::int64_t> checkpoint_times);

/// Structural checks every finished trace must satisfy: pulls sum to the
/// horizon, batch allocations stay inside the surviving set, surviving sets
/// shrink monotonically, outcomes are consistent, and the regret curve is
/// nondecreasing and lands on the exact total. Throws UsageError on violation.
void validate_trace(const RunTrace& trace, std::int64_t horizon);

}  // namespace batchts
