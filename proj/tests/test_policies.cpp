#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "batchts/datasets.hpp"
#include "batchts/policies.hpp"
#include "test_util.hpp"

using namespace batchts;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::ArrayXd vec(std::initializer_list<double> values) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) a[i++] = v;
  return a;
}

PolicyState two_arm_state_after_init() {
  PolicyState state = PolicyState::initial(2);
  state.stats[0] = {1, 1};
  state.stats[1] = {1, 1};
  state.elapsed = 2;
  return state;
}

}  // namespace

TEST_CASE("growth factor examples") {
  CHECK(btsd_growth_factor(1000000, 20) == doctest::Approx(1.9952623149688796).epsilon(1e-12));
  CHECK(btsd_growth_factor(12345, 1) == doctest::Approx(12345.0));
  CHECK(btsd_growth_factor(1024, 10) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(btsd_growth_factor(0, 5), UsageError);
  CHECK_THROWS_AS(btsd_growth_factor(10, 0), UsageError);
}

TEST_CASE("minimax grid examples") {
  CHECK(btsi_pull_grid(100, 2, 2) == std::vector<std::int64_t>{2, 23, 100});
  CHECK(btsi_pull_grid(100, 2, 1) == std::vector<std::int64_t>{2, 100});
  CHECK(btsi_pull_grid(50, 10, 1) == std::vector<std::int64_t>{10, 50});
  CHECK_THROWS_AS(btsi_pull_grid(10, 10, 3), UsageError);

  RandomStream rng(8, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int num_arms = 2 + static_cast<int>(rng.uniform() * 9);
    const std::int64_t horizon = num_arms + 1 + static_cast<std::int64_t>(rng.uniform() * 100000);
    const int rounds = 1 + static_cast<int>(rng.uniform() * 10);
    const auto grid = btsi_pull_grid(horizon, num_arms, rounds);
    REQUIRE(grid.size() == static_cast<std::size_t>(rounds) + 1);
    CHECK(grid.front() == num_arms);
    CHECK(grid.back() == horizon);  // clamped exactly
    for (std::size_t i = 1; i < grid.size(); ++i) {
      CHECK(grid[i] >= grid[i - 1]);  // nondecreasing; duplicates collapse later
      CHECK(grid[i] <= horizon);
    }
  }
}

TEST_CASE("prune rule examples") {
  const auto kept1 = prune_by_win_probability(vec({0.6, 0.399, 0.001}), 100.0);
  CHECK(kept1 == std::vector<std::size_t>{0, 1});

  CHECK(prune_by_win_probability(vec({0.5, 0.5}), 1.0) == std::vector<std::size_t>{0, 1});
  CHECK(prune_by_win_probability(vec({0.99, 0.01}), 100.0) == std::vector<std::size_t>{0, 1});
  CHECK(prune_by_win_probability(vec({0.99, 0.01}), 50.0) == std::vector<std::size_t>{0});
  CHECK(prune_by_win_probability(vec({0.2, 0.0, 0.8}), kInf) ==
        std::vector<std::size_t>{0, 1, 2});

  RandomStream rng(21, 0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::ArrayXd q(5);
    for (int i = 0; i < 5; ++i) q[i] = rng.uniform();
    Eigen::Index argmax = 0;
    q.maxCoeff(&argmax);
    for (double beta : {1.0, 2.0, 100.0}) {
      const auto kept = prune_by_win_probability(q, beta);
      CHECK(!kept.empty());
      bool has_argmax = false;
      for (auto k : kept) has_argmax |= (static_cast<Eigen::Index>(k) == argmax);
      CHECK(has_argmax);  // the argmax arm always survives
    }
  }
}

TEST_CASE("largest remainder apportionment") {
  CHECK(apportion_largest_remainder(vec({0.7, 0.3}), 10) == std::vector<std::int64_t>{7, 3});
  CHECK(apportion_largest_remainder(vec({0.55, 0.45}), 9) == std::vector<std::int64_t>{5, 4});
  const double third = 1.0 / 3.0;
  CHECK(apportion_largest_remainder(vec({third, third, third}), 10) ==
        std::vector<std::int64_t>{4, 3, 3});
  CHECK(apportion_largest_remainder(vec({0.5, 0.5}), 0) == std::vector<std::int64_t>{0, 0});

  CHECK_THROWS_AS(apportion_largest_remainder(vec({-0.1, 1.1}), 5), UsageError);
  CHECK_THROWS_AS(apportion_largest_remainder(vec({0.5, 0.4}), 5), UsageError);
  CHECK_THROWS_AS(apportion_largest_remainder(vec({0.5, 0.5}), -1), UsageError);

  RandomStream rng(33, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 8);
    Eigen::ArrayXd w(n);
    for (int i = 0; i < n; ++i) w[i] = rng.uniform() + 1e-3;
    w /= w.sum();
    const std::int64_t total = static_cast<std::int64_t>(rng.uniform() * 1000);
    const auto counts = apportion_largest_remainder(w, total);
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      sum += counts[i];
      // within one pull of the exact share
      CHECK(std::abs(static_cast<double>(counts[i]) - w[static_cast<Eigen::Index>(i)] * total) <
            1.0 + 1e-9);
    }
    CHECK(sum == total);
  }
}

TEST_CASE("btsd batch planning examples") {
  PolicyConfig config;
  config.horizon = 1000;
  config.num_rounds = 10;

  // single survivor finishes the run
  PolicyState lone = PolicyState::initial(2);
  lone.surviving = {1};
  lone.stats[1] = {300, 200};
  lone.elapsed = 300;
  const auto plan = btsd_next_batch(lone, config);
  CHECK(plan.arms == std::vector<int>{1});
  CHECK(plan.pulls == std::vector<std::int64_t>{700});
  CHECK(plan.is_final);

  // identical two-arm state after init: ceil(2 * 10^0.4) = 6 pulls, split 3/3
  PolicyConfig cfg2;
  cfg2.horizon = 10000;
  cfg2.num_rounds = 10;
  const auto state = two_arm_state_after_init();
  const auto plan2 = btsd_next_batch(state, cfg2);
  CHECK(plan2.arms == std::vector<int>{0, 1});
  CHECK(plan2.length() == 6);
  CHECK(plan2.pulls == std::vector<std::int64_t>{3, 3});
  CHECK_FALSE(plan2.is_final);

  PolicyState done = two_arm_state_after_init();
  done.elapsed = 10000;
  CHECK_THROWS_AS(btsd_next_batch(done, cfg2), UsageError);
}

TEST_CASE("btsi batch planning examples") {
  const auto ds = builtin_instance("DS1");

  PolicyConfig config;
  config.horizon = 100;
  config.num_rounds = 2;

  RandomStream rng(4, 0);
  std::vector<std::int64_t> cps = {100};
  const auto trace = run_batched_ts(ds, config, BatchedTsKind::instance_independent, rng, cps);
  REQUIRE(trace.batches.size() == 3);
  CHECK(trace.batches[0].length() == 2);   // initialization
  CHECK(trace.batches[1].length() == 21);  // to boundary 23
  CHECK(trace.batches[2].length() == 77);  // to boundary 100

  PolicyConfig skip = config;
  skip.skip_init_batch = true;
  RandomStream rng2(4, 1);
  const auto trace2 = run_batched_ts(ds, skip, BatchedTsKind::instance_independent, rng2, cps);
  CHECK(trace2.batches[0].length() == 23);  // merged first batch
  CHECK(trace2.batches[0].entries[0].pulls == 12);  // uniform split, remainder down
  CHECK(trace2.batches[0].entries[1].pulls == 11);
  CHECK(trace2.total_pulls() == 100);

  // single survivor goes straight to the end
  PolicyState lone = PolicyState::initial(2);
  lone.surviving = {0};
  lone.stats[0] = {23, 20};
  lone.elapsed = 23;
  lone.grid = btsi_pull_grid(100, 2, 2);
  const auto plan = btsi_next_batch(lone, config);
  CHECK(plan.is_final);
  CHECK(plan.pulls == std::vector<std::int64_t>{77});
}

TEST_CASE("ingest_batch semantics") {
  PolicyState state = two_arm_state_after_init();

  BatchPlan zero;
  zero.arms = {0, 1};
  zero.pulls = {0, 0};
  const std::vector<std::int64_t> no_wins = {0, 0};
  ingest_batch(state, zero, no_wins);
  CHECK(state.round == 1);
  CHECK(state.elapsed == 2);
  CHECK(state.stats[0].pulls == 1);

  BatchPlan plan;
  plan.arms = {1};
  plan.pulls = {4};
  const std::vector<std::int64_t> wins = {3};
  ingest_batch(state, plan, wins);
  CHECK(state.elapsed == 6);
  CHECK(state.surviving == std::vector<int>{1});
  CHECK(state.stats[1].pulls == 5);
  CHECK(state.stats[1].successes == 4);

  const std::vector<std::int64_t> mismatched = {1, 2};
  CHECK_THROWS_AS(ingest_batch(state, plan, mismatched), UsageError);
}

TEST_CASE("full runs respect the batch-count bounds and conservation") {
  const std::vector<std::string> datasets = {"DS1", "DS3", "DS4", "DS6"};
  for (const auto& name : datasets) {
    const auto instance = builtin_instance(name);
    for (std::int64_t horizon : {200LL, 3001LL, 20000LL}) {
      for (int rounds : {1, 3, 20}) {
        if (horizon <= instance.num_arms()) continue;
        PolicyConfig config;
        config.horizon = horizon;
        config.num_rounds = rounds;
        for (int seed = 0; seed < 3; ++seed) {
          RandomStream rng_d(seed, 0);
          const auto cps = default_checkpoints(horizon);
          const auto btsd =
              run_batched_ts(instance, config, BatchedTsKind::instance_dependent, rng_d, cps);
          validate_trace(btsd, horizon);
          // at most M policy changes after the initialization batch
          CHECK(btsd.num_batches() - 1 <= rounds);

          RandomStream rng_i(seed, 1);
          const auto btsi =
              run_batched_ts(instance, config, BatchedTsKind::instance_independent, rng_i, cps);
          validate_trace(btsi, horizon);
          CHECK(btsi.num_batches() <= rounds + 1);

          PolicyConfig skip = config;
          skip.skip_init_batch = true;
          RandomStream rng_s(seed, 2);
          const auto merged =
              run_batched_ts(instance, skip, BatchedTsKind::instance_independent, rng_s, cps);
          validate_trace(merged, horizon);
          CHECK(merged.num_batches() <= rounds + 1);
        }
      }
    }
  }
}

TEST_CASE("no-prune variants keep every arm in play until the last round") {
  const auto instance = builtin_instance("DS1");
  PolicyConfig config;
  config.horizon = 5000;
  config.num_rounds = 10;
  config.beta = kInf;
  RandomStream rng(17, 0);
  const auto cps = default_checkpoints(config.horizon);
  const auto trace = run_batched_ts(instance, config, BatchedTsKind::instance_dependent, rng, cps);
  validate_trace(trace, config.horizon);
  for (const auto& batch : trace.batches) {
    CHECK(batch.surviving.size() == 2);  // pruning disabled
  }
}

TEST_CASE("skip_init_batch is rejected for the instance-dependent policy") {
  PolicyConfig config;
  config.horizon = 100;
  config.skip_init_batch = true;
  RandomStream rng(1, 0);
  const std::vector<std::int64_t> cps = {100};
  CHECK_THROWS_AS(run_batched_ts(builtin_instance("DS1"), config,
                                 BatchedTsKind::instance_dependent, rng, cps),
                  UsageError);
}

TEST_CASE("theory alpha overrides alpha") {
  PolicyConfig config;
  config.horizon = 1000;
  config.alpha = 123.0;
  CHECK(config.effective_alpha() == 123.0);
  config.theory_alpha = true;
  CHECK(config.effective_alpha() == doctest::Approx(std::log(2000.0)));
}

// Win-probability lower bound for the best arm: over the full (T, T1, T2)
// grid with empirical means perturbed to the worst corner of the
// sqrt(ln(2T)/T_i) band, the two-arm win probability never falls below
// Phi(-sqrt(2)) > 0.01.
TEST_CASE("best-arm win probability stays above Phi(-sqrt(2)) in the band") {
  const double phi_ref = std_normal_cdf(-std::sqrt(2.0));
  CHECK(phi_ref == doctest::Approx(testutil::kPhiMinusSqrt2).epsilon(1e-13));
  for (double horizon : {1e3, 1e4, 1e5}) {
    const double alpha = std::log(2.0 * horizon);
    for (double pulls_1 : {1.0, 10.0, 100.0, 1000.0}) {
      for (double pulls_2 : {1.0, 10.0, 100.0, 1000.0}) {
        for (double gap : {0.0, 0.1, 0.3}) {
          const double mean_2 = 0.3;
          const double mean_1 = mean_2 + gap;
          const double hat_1 = mean_1 - std::sqrt(alpha / pulls_1);
          const double hat_2 = mean_2 + std::sqrt(alpha / pulls_2);
          const double q = argmax_probability_two({hat_1, alpha / pulls_1},
                                                  {hat_2, alpha / pulls_2});
          CHECK(q > 0.01);
          // 1e-14 absorbs IEEE rounding at the exact-equality corner
          CHECK(q >= phi_ref - 1e-14);
        }
      }
    }
  }
}

// Once the runner-up has been pulled past 100*beta*ln(2T)/gap^2 times (and
// the leader at least a beta-th of that), its win probability drops below
// 1e-4 for any empirical means inside the band.
TEST_CASE("runner-up win probability collapses after enough pulls") {
  const double beta = 100.0;
  for (double horizon : {1e3, 1e4, 1e5}) {
    const double alpha = std::log(2.0 * horizon);
    for (double gap : {0.1, 0.3}) {
      const double pulls_2 = std::floor(100.0 * beta * alpha / (gap * gap)) + 1.0;
      for (double pulls_1 : {std::ceil(pulls_2 / beta), pulls_2}) {
        const double mean_2 = 0.3;
        const double mean_1 = mean_2 + gap;
        const double hat_1 = mean_1 - std::sqrt(alpha / pulls_1);
        const double hat_2 = mean_2 + std::sqrt(alpha / pulls_2);
        const double q_runner_up = argmax_probability_two({hat_2, alpha / pulls_2},
                                                          {hat_1, alpha / pulls_1});
        CHECK(q_runner_up < 1e-4);
      }
    }
  }
}

// The pruning rule bounds the win-probability ratio, not the pull-count
// ratio; this records the count ratio actually seen so drift is visible.
TEST_CASE("two-arm pull-count ratio at batch boundaries (reported, not asserted)") {
  double worst_ratio = 0.0;
  for (const auto& name : {"DS1", "DS2", "DS3"}) {
    const auto instance = builtin_instance(name);
    PolicyConfig config;
    config.horizon = 10000;
    config.num_rounds = 14;
    config.theory_alpha = true;
    for (int seed = 0; seed < 10; ++seed) {
      RandomStream rng(seed, 0);
      const std::vector<std::int64_t> cps = {10000};
      const auto trace =
          run_batched_ts(instance, config, BatchedTsKind::instance_dependent, rng, cps);
      ArmStats a, b;
      for (const auto& batch : trace.batches) {
        for (const auto& e : batch.entries) {
          (e.arm == 0 ? a : b) = update_stats(e.arm == 0 ? a : b, e.successes, e.pulls);
        }
        if (batch.surviving.size() == 2 && a.pulls > 0 && b.pulls > 0) {
          const double ratio = static_cast<double>(std::max(a.pulls, b.pulls)) /
                               static_cast<double>(std::min(a.pulls, b.pulls));
          worst_ratio = std::max(worst_ratio, ratio);
        }
      }
    }
  }
  MESSAGE("max two-arm pull-count ratio while both survive: ", worst_ratio);
  CHECK(worst_ratio >= 1.0);
}
