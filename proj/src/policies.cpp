#include "batchts/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace batchts {

double PolicyConfig::effective_alpha() const {
  if (theory_alpha) return std::log(2.0 * static_cast<double>(horizon));
  return alpha;
}

void PolicyConfig::validate(int num_arms) const {
  if (horizon < num_arms) {
    throw UsageError("horizon must be at least the number of arms");
  }
  if (num_rounds < 1) throw UsageError("num_rounds must be >= 1");
  if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
  if (!(beta >= 1.0)) throw UsageError("beta must be >= 1 (or +inf to disable pruning)");
}

PolicyState PolicyState::initial(int num_arms) {
  PolicyState state;
  state.surviving.resize(num_arms);
  std::iota(state.surviving.begin(), state.surviving.end(), 0);
  state.stats.resize(num_arms);
  return state;
}

Eigen::ArrayXd PolicyState::win_probabilities(double alpha) const {
  std::vector<GaussianBelief> beliefs;
  beliefs.reserve(surviving.size());
  for (int arm : surviving) {
    const auto& s = stats[arm];
    if (s.pulls < 1) {
      throw UsageError("win probabilities need at least one pull per surviving arm");
    }
    beliefs.push_back({s.empirical_mean(), alpha / static_cast<double>(s.pulls)});
  }
  return argmax_probabilities(beliefs);
}

std::int64_t BatchPlan::length() const {
  std::int64_t total = 0;
  for (auto p : pulls) total += p;
  return total;
}

double btsd_growth_factor(std::int64_t horizon, int num_rounds) {
  if (horizon < 1 || num_rounds < 1) {
    throw UsageError("growth factor needs horizon >= 1 and num_rounds >= 1");
  }
  return std::pow(static_cast<double>(horizon), 1.0 / num_rounds);
}

std::vector<std::int64_t> btsi_pull_grid(std::int64_t horizon, int num_arms, int num_rounds) {
  if (horizon <= num_arms) {
    throw UsageError("btsi_pull_grid requires horizon > num_arms");
  }
  if (num_rounds < 1) throw UsageError("num_rounds must be >= 1");
  const double exponent = 1.0 / (2.0 - std::pow(2.0, 1.0 - num_rounds));
  const double a = std::pow(static_cast<double>(horizon - num_arms), exponent);
  std::vector<std::int64_t> grid;
  grid.reserve(num_rounds + 1);
  grid.push_back(num_arms);
  double u = a;
  for (int r = 2; r <= num_rounds + 1; ++r) {
    const std::int64_t boundary = static_cast<std::int64_t>(std::floor(u)) + num_arms;
    grid.push_back(std::min(boundary, horizon));
    u = a * std::sqrt(u);
  }
  grid.back() = horizon;
  return grid;
}

std::vector<std::size_t> prune_by_win_probability(const Eigen::ArrayXd& win_prob, double beta) {
  if (win_prob.size() == 0) throw UsageError("prune needs a nonempty probability vector");
  if (!(beta >= 1.0)) throw UsageError("beta must be >= 1");
  const double threshold = std::isinf(beta) ? 0.0 : win_prob.maxCoeff() / beta;
  std::vector<std::size_t> kept;
  for (Eigen::Index k = 0; k < win_prob.size(); ++k) {
    if (win_prob[k] >= threshold) kept.push_back(static_cast<std::size_t>(k));
  }
  return kept;
}

std::vector<std::int64_t> apportion_largest_remainder(const Eigen::ArrayXd& weights,
                                                      std::int64_t total) {
  if (total < 0) throw UsageError("apportionment total must be nonnegative");
  if ((weights < 0.0).any()) throw UsageError("apportionment weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-9) {
    throw UsageError("apportionment weights must sum to 1");
  }
  const Eigen::Index n = weights.size();
  std::vector<std::int64_t> counts(n, 0);
  std::vector<double> remainders(n, 0.0);
  std::int64_t assigned = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double share = weights[i] * static_cast<double>(total);
    counts[i] = static_cast<std::int64_t>(std::floor(share));
    remainders[i] = share - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<Eigen::Index> by_remainder(n);
  std::iota(by_remainder.begin(), by_remainder.end(), Eigen::Index{0});
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return remainders[a] > remainders[b]; });
  std::int64_t leftover = total - assigned;
  for (Eigen::Index k = 0; leftover > 0; k = (k + 1) % n, --leftover) {
    ++counts[by_remainder[k]];
  }
  return counts;
}

namespace {

struct PrunedSurvivors {
  std::vector<int> arms;    // ascending arm ids
  Eigen::ArrayXd win_prob;  // aligned with arms
};

PrunedSurvivors prune_survivors(const PolicyState& state, const PolicyConfig& config) {
  const Eigen::ArrayXd q = state.win_probabilities(config.effective_alpha());
  const auto kept = prune_by_win_probability(q, config.beta);
  PrunedSurvivors out;
  out.arms.reserve(kept.size());
  out.win_prob.resize(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.arms.push_back(state.surviving[kept[k]]);
    out.win_prob[static_cast<Eigen::Index>(k)] = q[static_cast<Eigen::Index>(kept[k])];
  }
  return out;
}

// Every policy finishes the run in one batch once a single arm survives.
BatchPlan single_survivor_plan(int arm, std::int64_t remaining) {
  BatchPlan plan;
  plan.arms = {arm};
  plan.pulls = {remaining};
  plan.is_final = true;
  return plan;
}

BatchPlan finish_plan(PrunedSurvivors survivors, std::int64_t planned_length,
                      std::int64_t remaining, bool last_round) {
  std::int64_t length = planned_length;
  if (survivors.arms.size() == 1 || last_round) length = remaining;
  length = std::min(length, remaining);
  BatchPlan plan;
  plan.arms = std::move(survivors.arms);
  plan.is_final = (length == remaining);
  survivors.win_prob /= survivors.win_prob.sum();
  plan.pulls = apportion_largest_remainder(survivors.win_prob, length);
  return plan;
}

}  // namespace

BatchPlan btsd_next_batch(const PolicyState& state, const PolicyConfig& config) {
  const std::int64_t remaining = config.horizon - state.elapsed;
  if (remaining <= 0) throw UsageError("btsd_next_batch called after the horizon");
  if (state.surviving.size() == 1) return single_survivor_plan(state.surviving[0], remaining);

  PrunedSurvivors survivors = prune_survivors(state, config);
  const double growth = btsd_growth_factor(config.horizon, config.num_rounds);
  const double raw = static_cast<double>(survivors.arms.size()) *
                     std::pow(growth, static_cast<double>(state.round + 1));
  const std::int64_t planned = raw >= static_cast<double>(remaining)
                                   ? remaining
                                   : static_cast<std::int64_t>(std::ceil(raw));
  return finish_plan(std::move(survivors), planned, remaining,
                     state.round + 1 >= config.num_rounds);
}

BatchPlan btsi_next_batch(const PolicyState& state, const PolicyConfig& config) {
  const std::int64_t remaining = config.horizon - state.elapsed;
  if (remaining <= 0) throw UsageError("btsi_next_batch called after the horizon");
  if (state.grid.empty()) throw UsageError("btsi_next_batch needs a precomputed grid");
  if (state.surviving.size() == 1) return single_survivor_plan(state.surviving[0], remaining);

  // Next strictly-larger boundary; duplicate grid entries collapse here
  // without consuming a batch.
  const auto it = std::upper_bound(state.grid.begin(), state.grid.end(), state.elapsed);
  const std::int64_t boundary = (it == state.grid.end()) ? config.horizon : *it;
  const std::int64_t planned_length = boundary - state.elapsed;

  bool any_unpulled = false;
  for (int arm : state.surviving) {
    if (state.stats[arm].pulls == 0) any_unpulled = true;
  }
  if (any_unpulled) {
    // Merged initialization (skip_init_batch): no beliefs exist yet, so the
    // first grid batch absorbs the init boundary and splits uniformly over
    // all arms up to the second boundary.
    const auto merged = std::upper_bound(state.grid.begin(), state.grid.end(),
                                         state.grid.front());
    const std::int64_t merged_boundary = (merged == state.grid.end()) ? config.horizon : *merged;
    BatchPlan plan;
    plan.arms = state.surviving;
    const Eigen::Index n = static_cast<Eigen::Index>(plan.arms.size());
    const std::int64_t length = std::min(merged_boundary - state.elapsed, remaining);
    plan.is_final = (length == remaining);
    plan.pulls = apportion_largest_remainder(
        Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n)), length);
    return plan;
  }
  return finish_plan(prune_survivors(state, config), planned_length, remaining,
                     state.round + 1 >= config.num_rounds);
}

void ingest_batch(PolicyState& state, const BatchPlan& plan,
                  std::span<const std::int64_t> successes) {
  if (successes.size() != plan.arms.size()) {
    throw UsageError("ingest_batch outcome count does not match the plan");
  }
  for (std::size_t k = 0; k < plan.arms.size(); ++k) {
    const int arm = plan.arms[k];
    if (arm < 0 || arm >= static_cast<int>(state.stats.size())) {
      throw UsageError("plan references an unknown arm");
    }
    state.stats[arm] = update_stats(state.stats[arm], successes[k], plan.pulls[k]);
  }
  state.surviving = plan.arms;
  state.elapsed += plan.length();
  state.round += 1;
}

RunTrace run_batched_ts(const BanditInstance& instance, const PolicyConfig& config,
                        BatchedTsKind kind, RandomStream& rng,
                        std::span<const std::int64_t> checkpoint_times) {
  PolicyConfig cfg = config;
  const int num_arms = instance.num_arms();
  cfg.validate(num_arms);
  validate_checkpoints(checkpoint_times, cfg.horizon);
  if (kind == BatchedTsKind::instance_dependent && cfg.skip_init_batch) {
    throw UsageError("skip_init_batch applies to the instance-independent policy only");
  }

  PolicyState state = PolicyState::initial(num_arms);
  if (kind == BatchedTsKind::instance_independent) {
    state.grid = btsi_pull_grid(cfg.horizon, num_arms, cfg.num_rounds);
  }

  RunTrace trace{instance, {}, {}};
  int batch_index = 0;

  const bool explicit_init = (kind == BatchedTsKind::instance_dependent) || !cfg.skip_init_batch;
  if (explicit_init) {
    BatchRecord record;
    record.batch_index = ++batch_index;
    record.start_time = 0;
    record.surviving = state.surviving;
    for (int arm = 0; arm < num_arms; ++arm) {
      const std::int64_t reward = draw_reward(instance, arm, rng);
      state.stats[arm] = update_stats(state.stats[arm], reward, 1);
      record.entries.push_back({arm, 1, reward});
    }
    state.elapsed += num_arms;
    trace.batches.push_back(std::move(record));
  }

  while (state.elapsed < cfg.horizon) {
    const BatchPlan plan = (kind == BatchedTsKind::instance_dependent)
                               ? btsd_next_batch(state, cfg)
                               : btsi_next_batch(state, cfg);
    BatchRecord record;
    record.batch_index = ++batch_index;
    record.start_time = state.elapsed;
    record.surviving = plan.arms;
    std::vector<std::int64_t> successes(plan.arms.size(), 0);
    for (std::size_t k = 0; k < plan.arms.size(); ++k) {
      std::int64_t wins = 0;
      for (std::int64_t p = 0; p < plan.pulls[k]; ++p) {
        wins += draw_reward(instance, plan.arms[k], rng);
      }
      successes[k] = wins;
      record.entries.push_back({plan.arms[k], plan.pulls[k], wins});
    }
    ingest_batch(state, plan, successes);
    trace.batches.push_back(std::move(record));
  }

  trace.checkpoints = regret_curve(instance, trace.batches, checkpoint_times);
  return trace;
}

}  // namespace batchts
