#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "batchts/baselines.hpp"
#include "batchts/core.hpp"
#include "batchts/policies.hpp"

namespace batchts {

enum class Algorithm {
  btsd,            // batched TS, instance-dependent schedule
  btsi,            // batched TS, instance-independent schedule
  ts,              // sequential Thompson sampling
  ucb1,            // sequential UCB1
  elim_geometric,  // successive elimination on the geometric grid
  elim_minimax,    // successive elimination on the minimax grid
  improved_ucb,    // batched improved-UCB
};

const std::vector<std::string>& algorithm_names();
std::string algorithm_name(Algorithm kind);

/// Parsed algorithm name; the btsd- / btsi- spellings disable pruning.
struct AlgorithmVariant {
  Algorithm kind = Algorithm::btsd;
  bool no_prune = false;
};
AlgorithmVariant parse_algorithm_variant(const std::string& name);
Algorithm parse_algorithm(const std::string& name);

/// Which algorithm to run plus the knobs each family reads.
struct AlgorithmSpec {
  Algorithm kind = Algorithm::btsd;
  PolicyConfig policy;       // btsd / btsi (horizon filled in at run time)
  EliminationConfig elim;    // elim_*
  ImprovedUcbConfig iucb;    // improved_ucb
};

/// Everything a reproducible experiment needs. The aggregate result is a pure
/// function of this struct (threads only changes wall time, never output).
struct ExperimentSpec {
  BanditInstance instance;
  AlgorithmSpec algorithm;
  std::int64_t horizon = 0;
  int repetitions = 1;
  std::uint64_t master_seed = 0;
  std::vector<std::int64_t> checkpoints;  // defaulted to powers of ten if empty
  int threads = 0;                        // 0 = hardware concurrency

  void validate() const;
  std::vector<std::int64_t> resolved_checkpoints() const;
};

/// Mean/std regret curve and batch-count statistics over replications.
/// Standard deviations are population deviations (a single replication
/// reports zero).
struct AggregateResult {
  std::vector<std::int64_t> checkpoint_times;
  Eigen::ArrayXd mean_regret;
  Eigen::ArrayXd std_regret;
  double mean_batches = 0.0;
  double std_batches = 0.0;
  std::int64_t min_batches = 0;
  std::int64_t max_batches = 0;
  Eigen::ArrayXd final_regrets;  // per replication, in replication order
};

/// One replication with an independent random stream derived from
/// (master_seed, replication_index). Identical inputs give bit-identical
/// traces. Every returned trace has been validated (pull conservation,
/// allocation support, monotone regret).
RunTrace run_once(const ExperimentSpec& spec, int replication_index);

/// All replications, optionally in parallel; the fold over replications is
/// fixed in index order, so results do not depend on thread count.
AggregateResult run_experiment(const ExperimentSpec& spec);

/// True iff every arm's empirical mean stays within sqrt(ln(2T)/T_i) of its
/// true mean at every batch boundary of the trace.
bool event_monitor(const RunTrace& trace, const BanditInstance& instance);

}  // namespace batchts
