#pragma once

#include <cstdint>
#include <span>

#include "batchts/core.hpp"

namespace batchts {

enum class GridKind { geometric, minimax };

/// Batched successive elimination: pulls survivors uniformly on a batch grid
/// and drops arm i once max_j mean_j - mean_i >= 2 * scale * radius_i with
/// radius_i = sqrt(ln(2NT) / (2 T_i)).
struct EliminationConfig {
  GridKind grid_kind = GridKind::geometric;
  int num_rounds = 20;
  double confidence_scale = 1.0;

  void validate() const;
};

/// Improved-UCB elimination constants. Round m targets
/// ceil(pull_scale * ln(T * gap_m^2) / gap_m^2) pulls per surviving arm with
/// gap_m = 2^-m, and eliminates with radius
/// radius_scale * sqrt(ln(T * gap_m^2) / (2 n_m)). Published presentations
/// differ in these constants, hence the knobs.
struct ImprovedUcbConfig {
  double pull_scale = 2.0;
  double radius_scale = 1.0;
};

/// Fully sequential Thompson sampling with per-arm Beta(1,1) priors; every
/// pull is recorded as its own batch.
RunTrace thompson_beta_run(const BanditInstance& instance, std::int64_t horizon,
                           RandomStream& rng, std::span<const std::int64_t> checkpoint_times);

/// Sequential UCB1: one pull of each arm, then argmax of
/// mean_i + sqrt(2 ln t / T_i), index ties to the lower arm.
RunTrace ucb1_run(const BanditInstance& instance, std::int64_t horizon,
                  RandomStream& rng, std::span<const std::int64_t> checkpoint_times);

RunTrace batched_elimination_run(const BanditInstance& instance, std::int64_t horizon,
                                 const EliminationConfig& config, RandomStream& rng,
                                 std::span<const std::int64_t> checkpoint_times);

RunTrace improved_ucb_run(const BanditInstance& instance, std::int64_t horizon,
                          const ImprovedUcbConfig& config, RandomStream& rng,
                          std::span<const std::int64_t> checkpoint_times);

}  // namespace batchts
