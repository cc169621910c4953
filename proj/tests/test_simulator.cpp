#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "batchts/datasets.hpp"
#include "batchts/simulator.hpp"

using namespace batchts;

namespace {

ExperimentSpec basic_spec(const std::string& dataset, Algorithm kind, std::int64_t horizon,
                          int reps, std::uint64_t seed) {
  ExperimentSpec spec{builtin_instance(dataset), {}, horizon, reps, seed, {}, 0};
  spec.algorithm.kind = kind;
  return spec;
}

bool traces_equal(const RunTrace& a, const RunTrace& b) {
  if (a.batches.size() != b.batches.size()) return false;
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    if (a.batches[i].start_time != b.batches[i].start_time) return false;
    if (a.batches[i].entries.size() != b.batches[i].entries.size()) return false;
    for (std::size_t j = 0; j < a.batches[i].entries.size(); ++j) {
      const auto& x = a.batches[i].entries[j];
      const auto& y = b.batches[i].entries[j];
      if (x.arm != y.arm || x.pulls != y.pulls || x.successes != y.successes) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("algorithm name round-trips and variants") {
  for (const auto& name : algorithm_names()) {
    CHECK(algorithm_name(parse_algorithm(name)) == name);
  }
  CHECK(parse_algorithm_variant("btsd-").no_prune);
  CHECK(parse_algorithm_variant("btsi-").no_prune);
  CHECK_FALSE(parse_algorithm_variant("btsd").no_prune);
  CHECK_THROWS_AS(parse_algorithm("nope"), UsageError);
}

TEST_CASE("identical spec and index give bit-identical traces") {
  const auto spec = basic_spec("DS1", Algorithm::btsd, 5000, 4, 99);
  const auto a = run_once(spec, 2);
  const auto b = run_once(spec, 2);
  CHECK(traces_equal(a, b));
  const auto c = run_once(spec, 3);
  CHECK_FALSE(traces_equal(a, c));
  CHECK_THROWS_AS(run_once(spec, 4), UsageError);
  CHECK_THROWS_AS(run_once(spec, -1), UsageError);
}

TEST_CASE("degenerate instance accrues zero regret") {
  ExperimentSpec spec{BanditInstance("flat", Eigen::ArrayXd::Constant(3, 0.7)),
                      {}, 2000, 5, 1, {}, 0};
  spec.algorithm.kind = Algorithm::btsd;
  const auto result = run_experiment(spec);
  CHECK(result.mean_regret.abs().maxCoeff() == 0.0);
  CHECK(result.std_regret.abs().maxCoeff() == 0.0);
}

TEST_CASE("single replication reports zero deviation") {
  const auto spec = basic_spec("DS2", Algorithm::ucb1, 1000, 1, 5);
  const auto result = run_experiment(spec);
  CHECK(result.std_regret.maxCoeff() == 0.0);
  CHECK(result.std_batches == 0.0);
  CHECK(result.min_batches == result.max_batches);
  CHECK(result.final_regrets.size() == 1);
}

TEST_CASE("aggregation is independent of thread count") {
  for (auto kind : {Algorithm::btsd, Algorithm::ts, Algorithm::elim_minimax}) {
    auto spec = basic_spec("DS3", kind, 2000, 12, 31);
    spec.threads = 1;
    const auto serial = run_experiment(spec);
    spec.threads = 4;
    const auto parallel = run_experiment(spec);
    CHECK((serial.mean_regret == parallel.mean_regret).all());
    CHECK((serial.std_regret == parallel.std_regret).all());
    CHECK((serial.final_regrets == parallel.final_regrets).all());
    CHECK(serial.mean_batches == parallel.mean_batches);
    CHECK(serial.min_batches == parallel.min_batches);
    CHECK(serial.max_batches == parallel.max_batches);
  }
}

TEST_CASE("aggregate final regrets match per-replication traces") {
  const auto spec = basic_spec("DS1", Algorithm::btsi, 3000, 6, 77);
  const auto result = run_experiment(spec);
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    const auto trace = run_once(spec, rep);
    CHECK(result.final_regrets[rep] == doctest::Approx(trace.final_regret()).epsilon(1e-12));
    const auto counts = trace.allocation();
    CHECK(trace.final_regret() ==
          doctest::Approx(pseudo_regret(trace.instance, std::span<const std::int64_t>(counts)))
              .epsilon(1e-12));
  }
  CHECK(result.checkpoint_times.back() == 3000);
  // regret curve is nondecreasing in t
  for (Eigen::Index i = 1; i < result.mean_regret.size(); ++i) {
    CHECK(result.mean_regret[i] >= result.mean_regret[i - 1] - 1e-12);
  }
}

TEST_CASE("every algorithm runs clean through the dispatcher") {
  for (const auto& name : algorithm_names()) {
    auto spec = basic_spec("DS6", parse_algorithm(name), 500, 3, 13);
    spec.algorithm.policy.num_rounds = 6;
    spec.algorithm.elim.num_rounds = 6;
    const auto result = run_experiment(spec);  // run_once validates each trace
    CHECK(result.final_regrets.size() == 3);
    if (name == "ts" || name == "ucb1") {
      CHECK(result.mean_batches == 500.0);  // sequential: one batch per pull
    } else {
      CHECK(result.max_batches <= 8);
    }
  }
}

TEST_CASE("event monitor accepts deterministic arms and in-band traces") {
  Eigen::ArrayXd means(2);
  means << 1.0, 0.0;
  const BanditInstance deg("deg", means);
  ExperimentSpec spec{deg, {}, 1000, 1, 3, {}, 0};
  spec.algorithm.kind = Algorithm::btsd;
  const auto trace = run_once(spec, 0);
  CHECK(event_monitor(trace, deg));  // zero-variance arms never leave the band
}

TEST_CASE("event monitor rejects a trace forced outside the band") {
  const auto ds1 = builtin_instance("DS1");
  RunTrace synthetic{ds1, {}, {}};
  // 400 pulls of arm 0 with zero successes: |0 - 0.9| >> sqrt(ln(800)/400)
  synthetic.batches.push_back({1, 0, {}, {{0, 400, 0}}});
  CHECK_FALSE(event_monitor(synthetic, ds1));

  RunTrace plausible{ds1, {}, {}};
  plausible.batches.push_back({1, 0, {}, {{0, 400, 360}}});  // exactly on the mean
  CHECK(event_monitor(plausible, ds1));
}

TEST_CASE("event monitor holds on nearly every batched-ts replication") {
  const auto spec = basic_spec("DS1", Algorithm::btsd, 2000, 200, 2718);
  int held = 0;
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    held += event_monitor(run_once(spec, rep), spec.instance) ? 1 : 0;
  }
  CHECK(held >= 198);  // expect ~all of them at T = 2000
}

TEST_CASE("spec validation") {
  auto spec = basic_spec("DS1", Algorithm::btsd, 100, 2, 1);
  spec.checkpoints = {50, 100};
  run_once(spec, 0);
  spec.checkpoints = {50};  // must end at the horizon
  CHECK_THROWS_AS(run_once(spec, 0), UsageError);
  spec.checkpoints.clear();
  spec.repetitions = 0;
  CHECK_THROWS_AS(run_experiment(spec), UsageError);
}
