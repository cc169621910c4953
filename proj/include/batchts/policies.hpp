#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "batchts/argmax.hpp"
#include "batchts/core.hpp"

namespace batchts {

/// Shared configuration for both batched Thompson-sampling policies.
///
/// beta = +infinity disables pruning (the "-" variants). theory_alpha
/// replaces alpha with ln(2T), the setting the regret analysis uses;
/// the experimental default is alpha = 1, beta = 100, num_rounds = 20.
struct PolicyConfig {
  double alpha = 1.0;
  double beta = 100.0;
  int num_rounds = 20;         // M
  std::int64_t horizon = 0;    // T
  bool skip_init_batch = false;  // merge the one-pull-per-arm batch into the
                                 // first grid batch (uniform split); BTSI only
  bool theory_alpha = false;

  double effective_alpha() const;
  void validate(int num_arms) const;
};

/// Mutable per-run view of a batched policy: which arms survive, their
/// tallies, and how far the run has progressed.
struct PolicyState {
  std::vector<int> surviving;      // ascending arm ids, never empty
  std::vector<ArmStats> stats;     // indexed by arm id
  int round = 0;                   // completed post-initialization batches
  std::int64_t elapsed = 0;        // total pulls so far
  std::vector<std::int64_t> grid;  // precomputed pull boundaries (BTSI); empty for BTSD

  static PolicyState initial(int num_arms);
  Eigen::ArrayXd win_probabilities(double alpha) const;
};

/// One planned batch: the post-prune surviving arms and their pull counts.
struct BatchPlan {
  std::vector<int> arms;           // ascending
  std::vector<std::int64_t> pulls; // aligned with arms
  bool is_final = false;           // batch ends exactly at the horizon

  std::int64_t length() const;
};

/// Geometric batch growth factor T^(1/M).
double btsd_growth_factor(std::int64_t horizon, int num_rounds);

/// Instance-independent pull boundaries [T_1, ..., T_{M+1}]: T_1 = N,
/// T_r = floor(u_{r-1}) + N with u_1 = a, u_r = a*sqrt(u_{r-1}) and
/// a = (T-N)^(1/(2-2^(1-M))); the last entry is clamped to exactly T.
std::vector<std::int64_t> btsi_pull_grid(std::int64_t horizon, int num_arms, int num_rounds);

/// Keeps position k iff win_prob[k] >= max(win_prob)/beta. Returns the kept
/// positions in ascending order; the argmax always survives.
std::vector<std::size_t> prune_by_win_probability(const Eigen::ArrayXd& win_prob, double beta);

/// Largest-remainder apportionment of `total` pulls over nonnegative weights
/// summing to 1 (within 1e-9). Leftover pulls go to the largest fractional
/// remainders, ties to the lower index.
std::vector<std::int64_t> apportion_largest_remainder(const Eigen::ArrayXd& weights,
                                                      std::int64_t total);

/// Plans the next batch of the instance-dependent policy: computes win
/// probabilities over the surviving arms, prunes at max/beta, sizes the batch
/// as min(ceil(|survivors|*growth^round), T - elapsed), and allocates pulls
/// proportionally to the surviving win probabilities. A single survivor or
/// the final round takes all remaining pulls as one batch.
BatchPlan btsd_next_batch(const PolicyState& state, const PolicyConfig& config);

/// Same pipeline with batch lengths taken from the precomputed grid.
/// Zero-length grid steps are skipped without consuming a batch. Before any
/// arm has been pulled (skip_init_batch), the first batch splits uniformly.
BatchPlan btsi_next_batch(const PolicyState& state, const PolicyConfig& config);

/// Applies a batch's outcomes: exact tally updates, surviving set := plan
/// arms, round + 1, elapsed advanced by the batch length.
void ingest_batch(PolicyState& state, const BatchPlan& plan,
                  std::span<const std::int64_t> successes);

enum class BatchedTsKind { instance_dependent, instance_independent };

/// Runs one full replication of BTSD or BTSI against the instance.
RunTrace run_batched_ts(const BanditInstance& instance, const PolicyConfig& config,
                        BatchedTsKind kind, RandomStream& rng,
                        std::span<const std::int64_t> checkpoint_times);

}  // namespace batchts
