#include "batchts/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace batchts {

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {
      "btsd", "btsi", "ts", "ucb1", "elim-geometric", "elim-minimax", "improved-ucb"};
  return names;
}

AlgorithmVariant parse_algorithm_variant(const std::string& name) {
  if (name == "btsd") return {Algorithm::btsd, false};
  if (name == "btsd-") return {Algorithm::btsd, true};
  if (name == "btsi") return {Algorithm::btsi, false};
  if (name == "btsi-") return {Algorithm::btsi, true};
  if (name == "ts") return {Algorithm::ts, false};
  if (name == "ucb1") return {Algorithm::ucb1, false};
  if (name == "elim-geometric") return {Algorithm::elim_geometric, false};
  if (name == "elim-minimax") return {Algorithm::elim_minimax, false};
  if (name == "improved-ucb") return {Algorithm::improved_ucb, false};
  std::string valid;
  for (const auto& n : algorithm_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UsageError("unknown algorithm '" + name + "'; valid names: " + valid +
                   " (suffix - on btsd/btsi disables pruning)");
}

Algorithm parse_algorithm(const std::string& name) {
  return parse_algorithm_variant(name).kind;
}

std::string algorithm_name(Algorithm kind) {
  return algorithm_names()[static_cast<std::size_t>(kind)];
}

void ExperimentSpec::validate() const {
  if (horizon < 1) throw UsageError("horizon must be positive");
  if (repetitions < 1) throw UsageError("repetitions must be >= 1");
  if (threads < 0) throw UsageError("threads must be >= 0");
  if (!checkpoints.empty()) validate_checkpoints(checkpoints, horizon);
}

std::vector<std::int64_t> ExperimentSpec::resolved_checkpoints() const {
  return checkpoints.empty() ? default_checkpoints(horizon) : checkpoints;
}

RunTrace run_once(const ExperimentSpec& spec, int replication_index) {
  spec.validate();
  if (replication_index < 0 || replication_index >= spec.repetitions) {
    throw UsageError("replication index out of range");
  }
  RandomStream rng(spec.master_seed, static_cast<std::uint64_t>(replication_index));
  const auto cps = spec.resolved_checkpoints();

  PolicyConfig policy = spec.algorithm.policy;
  policy.horizon = spec.horizon;

  RunTrace trace = [&] {
    switch (spec.algorithm.kind) {
      case Algorithm::btsd:
        return run_batched_ts(spec.instance, policy, BatchedTsKind::instance_dependent,
                              rng, cps);
      case Algorithm::btsi:
        return run_batched_ts(spec.instance, policy, BatchedTsKind::instance_independent,
                              rng, cps);
      case Algorithm::ts:
        return thompson_beta_run(spec.instance, spec.horizon, rng, cps);
      case Algorithm::ucb1:
        return ucb1_run(spec.instance, spec.horizon, rng, cps);
      case Algorithm::elim_geometric: {
        EliminationConfig cfg = spec.algorithm.elim;
        cfg.grid_kind = GridKind::geometric;
        return batched_elimination_run(spec.instance, spec.horizon, cfg, rng, cps);
      }
      case Algorithm::elim_minimax: {
        EliminationConfig cfg = spec.algorithm.elim;
        cfg.grid_kind = GridKind::minimax;
        return batched_elimination_run(spec.instance, spec.horizon, cfg, rng, cps);
      }
      case Algorithm::improved_ucb:
        return improved_ucb_run(spec.instance, spec.horizon, spec.algorithm.iucb, rng, cps);
    }
    throw UsageError("unhandled algorithm kind");
  }();

  validate_trace(trace, spec.horizon);
  return trace;
}

namespace {

struct ReplicationSummary {
  Eigen::ArrayXd regrets;  // per checkpoint
  std::int64_t batches = 0;
};

}  // namespace

AggregateResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto cps = spec.resolved_checkpoints();
  const int reps = spec.repetitions;
  std::vector<ReplicationSummary> summaries(reps);

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const int workers = std::min<int>(reps, spec.threads > 0 ? spec.threads : static_cast<int>(hw));

  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        const RunTrace trace = run_once(spec, rep);
        ReplicationSummary summary;
        summary.regrets.resize(static_cast<Eigen::Index>(trace.checkpoints.size()));
        for (std::size_t c = 0; c < trace.checkpoints.size(); ++c) {
          summary.regrets[static_cast<Eigen::Index>(c)] = trace.checkpoints[c].regret;
        }
        summary.batches = trace.num_batches();
        summaries[rep] = std::move(summary);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Order-fixed fold over replication index.
  const Eigen::Index num_cps = static_cast<Eigen::Index>(cps.size());
  AggregateResult out;
  out.checkpoint_times = cps;
  out.mean_regret = Eigen::ArrayXd::Zero(num_cps);
  out.std_regret = Eigen::ArrayXd::Zero(num_cps);
  out.final_regrets.resize(reps);
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(num_cps);
  Eigen::ArrayXd sum_sq = Eigen::ArrayXd::Zero(num_cps);
  std::int64_t batch_sum = 0;
  double batch_sum_sq = 0.0;
  out.min_batches = summaries[0].batches;
  out.max_batches = summaries[0].batches;
  for (int rep = 0; rep < reps; ++rep) {
    const auto& s = summaries[rep];
    sum += s.regrets;
    sum_sq += s.regrets.square();
    out.final_regrets[rep] = s.regrets[num_cps - 1];
    batch_sum += s.batches;
    batch_sum_sq += static_cast<double>(s.batches) * static_cast<double>(s.batches);
    out.min_batches = std::min(out.min_batches, s.batches);
    out.max_batches = std::max(out.max_batches, s.batches);
  }
  const double n = static_cast<double>(reps);
  out.mean_regret = sum / n;
  out.std_regret = (sum_sq / n - out.mean_regret.square()).max(0.0).sqrt();
  out.mean_batches = static_cast<double>(batch_sum) / n;
  const double batch_var =
      std::max(0.0, batch_sum_sq / n - out.mean_batches * out.mean_batches);
  out.std_batches = std::sqrt(batch_var);
  return out;
}

bool event_monitor(const RunTrace& trace, const BanditInstance& instance) {
  const std::int64_t horizon = trace.total_pulls();
  if (horizon < 1) return true;
  const double log_term = std::log(2.0 * static_cast<double>(horizon));
  std::vector<ArmStats> stats(instance.num_arms());
  for (const auto& batch : trace.batches) {
    for (const auto& e : batch.entries) {
      stats[instance.check_arm(e.arm)] = update_stats(stats[e.arm], e.successes, e.pulls);
    }
    for (int arm = 0; arm < instance.num_arms(); ++arm) {
      const auto& s = stats[arm];
      if (s.pulls == 0) continue;
      const double band = std::sqrt(log_term / static_cast<double>(s.pulls));
      if (std::abs(s.empirical_mean() - instance.mean(arm)) > band) return false;
    }
  }
  return true;
}

}  // namespace batchts
