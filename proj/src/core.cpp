#include "batchts/core.hpp"

#include <algorithm>
#include <cmath>

namespace batchts {

BanditInstance::BanditInstance(std::string name, Eigen::ArrayXd means)
    : name_(std::move(name)), means_(std::move(means)) {
  if (means_.size() < 2) {
    throw UsageError("bandit instance needs at least 2 arms, got " +
                     std::to_string(means_.size()));
  }
  for (Eigen::Index i = 0; i < means_.size(); ++i) {
    if (!(means_[i] >= 0.0 && means_[i] <= 1.0)) {
      throw UsageError("arm mean out of [0,1] at index " + std::to_string(i));
    }
  }
  best_mean_ = means_.maxCoeff(&best_arm_);
  gaps_ = best_mean_ - means_;
}

int BanditInstance::check_arm(int arm) const {
  if (arm < 0 || arm >= num_arms()) {
    throw UsageError("arm index " + std::to_string(arm) + " out of range [0," +
                     std::to_string(num_arms()) + ")");
  }
  return arm;
}

ArmStats update_stats(ArmStats stats, std::int64_t successes, std::int64_t pulls) {
  if (pulls < 0 || successes < 0 || successes > pulls) {
    throw UsageError("update_stats requires 0 <= successes <= pulls");
  }
  stats.pulls += pulls;
  stats.successes += successes;
  return stats;
}

std::int64_t BatchRecord::length() const {
  std::int64_t total = 0;
  for (const auto& e : entries) total += e.pulls;
  return total;
}

std::int64_t RunTrace::total_pulls() const {
  std::int64_t total = 0;
  for (const auto& b : batches) total += b.length();
  return total;
}

std::vector<std::int64_t> RunTrace::allocation() const {
  std::vector<std::int64_t> counts(instance.num_arms(), 0);
  for (const auto& b : batches) {
    for (const auto& e : b.entries) counts[instance.check_arm(e.arm)] += e.pulls;
  }
  return counts;
}

int draw_reward(const BanditInstance& instance, int arm, RandomStream& rng) {
  return rng.bernoulli(instance.mean(instance.check_arm(arm)));
}

double pseudo_regret(const BanditInstance& instance, std::span<const std::int64_t> counts) {
  if (counts.size() > static_cast<std::size_t>(instance.num_arms())) {
    throw UsageError("allocation has more entries than arms");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw UsageError("allocation counts must be nonnegative");
    total += static_cast<double>(counts[i]) * instance.gaps()[static_cast<Eigen::Index>(i)];
  }
  return total;
}

double pseudo_regret(const BanditInstance& instance, std::span<const ArmOutcome> entries) {
  double total = 0.0;
  for (const auto& e : entries) {
    if (e.pulls < 0) throw UsageError("allocation counts must be nonnegative");
    total += static_cast<double>(e.pulls) * instance.gap(e.arm);
  }
  return total;
}

std::vector<std::int64_t> default_checkpoints(std::int64_t horizon) {
  if (horizon < 1) throw UsageError("horizon must be positive");
  std::vector<std::int64_t> grid;
  for (std::int64_t t = 1; t < horizon; t *= 10) {
    grid.push_back(t);
    if (t > horizon / 10) break;  // next decade would pass the horizon
  }
  if (grid.empty() || grid.back() != horizon) grid.push_back(horizon);
  return grid;
}

void validate_checkpoints(std::span<const std::int64_t> checkpoints, std::int64_t horizon) {
  if (checkpoints.empty()) throw UsageError("checkpoint grid is empty");
  std::int64_t prev = 0;
  for (auto t : checkpoints) {
    if (t <= prev) throw UsageError("checkpoints must be strictly increasing and positive");
    if (t > horizon) throw UsageError("checkpoint beyond horizon");
    prev = t;
  }
  if (checkpoints.back() != horizon) throw UsageError("last checkpoint must equal the horizon");
}

std::vector<Checkpoint> regret_curve(const BanditInstance& instance,
                                     std::span<const BatchRecord> batches,
                                     std::span<const std::int64_t> checkpoint_times) {
  std::vector<Checkpoint> curve;
  curve.reserve(checkpoint_times.size());
  std::size_t next = 0;
  double cumulative = 0.0;
  std::int64_t time = 0;
  for (const auto& batch : batches) {
    for (const auto& e : batch.entries) {
      const double gap = instance.gap(e.arm);
      while (next < checkpoint_times.size() && checkpoint_times[next] <= time + e.pulls) {
        const std::int64_t inside = checkpoint_times[next] - time;
        curve.push_back({checkpoint_times[next], cumulative + static_cast<double>(inside) * gap});
        ++next;
      }
      cumulative += static_cast<double>(e.pulls) * gap;
      time += e.pulls;
    }
  }
  if (next != checkpoint_times.size()) {
    throw UsageError("checkpoint grid extends past the recorded pulls");
  }
  return curve;
}

namespace {

bool subset_of(std::span<const int> sub, std::span<const int> super) {
  // both ascending
  std::size_t j = 0;
  for (int arm : sub) {
    while (j < super.size() && super[j] < arm) ++j;
    if (j == super.size() || super[j] != arm) return false;
  }
  return true;
}

}  // namespace

void validate_trace(const RunTrace& trace, std::int64_t horizon) {
  const int num_arms = trace.instance.num_arms();
  std::vector<int> all_arms(num_arms);
  for (int i = 0; i < num_arms; ++i) all_arms[i] = i;

  std::int64_t time = 0;
  std::vector<int> prev_surviving = all_arms;
  int expected_index = 1;
  for (const auto& batch : trace.batches) {
    if (batch.batch_index != expected_index++) {
      throw UsageError("batch indices must be consecutive from 1");
    }
    if (batch.start_time != time) throw UsageError("batch start_time mismatch");
    const std::vector<int>& surviving = batch.surviving.empty() ? all_arms : batch.surviving;
    if (!subset_of(surviving, prev_surviving)) {
      throw UsageError("surviving set grew between batches");
    }
    int prev_arm = -1;
    for (const auto& e : batch.entries) {
      trace.instance.check_arm(e.arm);
      if (e.arm <= prev_arm) throw UsageError("batch entries must ascend by arm");
      prev_arm = e.arm;
      if (e.pulls < 0 || e.successes < 0 || e.successes > e.pulls) {
        throw UsageError("batch outcome counts inconsistent");
      }
      if (!subset_of(std::span<const int>(&e.arm, 1), surviving)) {
        throw UsageError("batch pulled an arm outside the surviving set");
      }
    }
    time += batch.length();
    prev_surviving = surviving;
  }
  if (time != horizon) {
    throw UsageError("trace pulls " + std::to_string(time) + " != horizon " +
                     std::to_string(horizon));
  }
  double prev_regret = 0.0;
  for (const auto& c : trace.checkpoints) {
    if (c.regret + 1e-9 < prev_regret) throw UsageError("regret curve decreased");
    prev_regret = c.regret;
  }
  if (!trace.checkpoints.empty()) {
    const auto counts = trace.allocation();
    const double total = pseudo_regret(trace.instance, std::span<const std::int64_t>(counts));
    if (std::abs(trace.checkpoints.back().regret - total) > 1e-6 * std::max(1.0, total)) {
      throw UsageError("final checkpoint regret does not match total allocation");
    }
  }
}

}  // namespace batchts
