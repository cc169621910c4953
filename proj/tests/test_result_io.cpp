#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>
#include <sstream>

#include "batchts/result_io.hpp"

using namespace batchts;

TEST_CASE("numbers render with six significant digits") {
  CHECK(format_number(0.3) == "0.3");
  CHECK(format_number(1.0 / 3.0) == "0.333333");
  CHECK(format_number(123456789.0) == "1.23457e+08");
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(round6(1.0 / 3.0) == 0.333333);
  CHECK(round6(2.0) == 2.0);
}

TEST_CASE("run csv layout") {
  AggregateResult result;
  result.checkpoint_times = {1, 10};
  result.mean_regret = Eigen::ArrayXd::Zero(2);
  result.mean_regret << 0.25, 2.5;
  result.std_regret = Eigen::ArrayXd::Zero(2);
  result.mean_batches = 4.5;
  result.std_batches = 0.5;
  result.min_batches = 4;
  result.max_batches = 5;
  result.final_regrets = Eigen::ArrayXd::Constant(2, 2.5);

  std::ostringstream out;
  write_run_csv(out, result);
  CHECK(out.str() ==
        "t,mean_regret,std_regret\n"
        "1,0.25,0\n"
        "10,2.5,0\n"
        "batches,4.5,0.5\n");
}

TEST_CASE("sweep csv layout") {
  SweepRow row{"btsd", 1000, 12.5, 3.25, 6.0, 5, 7};
  std::ostringstream out;
  write_sweep_csv(out, std::vector<SweepRow>{row});
  CHECK(out.str() ==
        "algorithm,T,mean_regret,std_regret,mean_batches,min_batches,max_batches\n"
        "btsd,1000,12.5,3.25,6,5,7\n");
}

TEST_CASE("run json carries the spec and rounds values") {
  AggregateResult result;
  result.checkpoint_times = {5};
  result.mean_regret = Eigen::ArrayXd::Constant(1, 1.0 / 3.0);
  result.std_regret = Eigen::ArrayXd::Zero(1);
  result.final_regrets = Eigen::ArrayXd::Constant(1, 1.0 / 3.0);
  RunDescription desc;
  desc.dataset = "DS1";
  desc.algorithm = "btsi-";
  desc.horizon = 5;
  desc.repetitions = 1;
  desc.beta = std::numeric_limits<double>::infinity();
  const auto doc = run_result_json(desc, result);
  CHECK(doc["spec"]["beta"] == "inf");
  CHECK(doc["spec"]["algorithm"] == "btsi-");
  CHECK(doc["results"]["checkpoints"][0]["mean_regret"] == 0.333333);
}
