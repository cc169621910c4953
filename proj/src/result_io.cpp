#include "batchts/result_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace batchts {

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

double round6(double value) {
  if (!std::isfinite(value)) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return std::strtod(buf, nullptr);
}

void write_run_csv(std::ostream& out, const AggregateResult& result) {
  out << "t,mean_regret,std_regret\n";
  for (std::size_t c = 0; c < result.checkpoint_times.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    out << result.checkpoint_times[c] << ',' << format_number(result.mean_regret[i]) << ','
        << format_number(result.std_regret[i]) << '\n';
  }
  out << "batches," << format_number(result.mean_batches) << ','
      << format_number(result.std_batches) << '\n';
}

namespace {

nlohmann::ordered_json description_json(const RunDescription& desc) {
  nlohmann::ordered_json spec;
  spec["schema_version"] = 1;
  spec["dataset"] = desc.dataset;
  spec["algorithm"] = desc.algorithm;
  spec["horizon"] = desc.horizon;
  spec["reps"] = desc.repetitions;
  spec["seed"] = desc.seed;
  spec["alpha"] = desc.alpha;
  if (std::isinf(desc.beta)) {
    spec["beta"] = "inf";
  } else {
    spec["beta"] = desc.beta;
  }
  spec["rounds"] = desc.rounds;
  spec["skip_init"] = desc.skip_init;
  spec["theory_alpha"] = desc.theory_alpha;
  return spec;
}

}  // namespace

nlohmann::ordered_json run_result_json(const RunDescription& desc,
                                       const AggregateResult& result) {
  nlohmann::ordered_json doc;
  doc["spec"] = description_json(desc);
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < result.checkpoint_times.size(); ++c) {
    const auto i = static_cast<Eigen::Index>(c);
    curve.push_back({{"t", result.checkpoint_times[c]},
                     {"mean_regret", round6(result.mean_regret[i])},
                     {"std_regret", round6(result.std_regret[i])}});
  }
  nlohmann::ordered_json results;
  results["checkpoints"] = std::move(curve);
  results["batches"] = {{"mean", round6(result.mean_batches)},
                        {"std", round6(result.std_batches)},
                        {"min", result.min_batches},
                        {"max", result.max_batches}};
  nlohmann::ordered_json finals = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < result.final_regrets.size(); ++i) {
    finals.push_back(round6(result.final_regrets[i]));
  }
  results["final_regrets"] = std::move(finals);
  doc["results"] = std::move(results);
  return doc;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "algorithm,T,mean_regret,std_regret,mean_batches,min_batches,max_batches\n";
  for (const auto& row : rows) {
    out << row.algorithm << ',' << row.horizon << ',' << format_number(row.mean_regret) << ','
        << format_number(row.std_regret) << ',' << format_number(row.mean_batches) << ','
        << row.min_batches << ',' << row.max_batches << '\n';
  }
}

nlohmann::ordered_json sweep_result_json(const nlohmann::ordered_json& spec,
                                         std::span<const SweepRow> rows) {
  nlohmann::ordered_json doc;
  doc["spec"] = spec;
  nlohmann::ordered_json results = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    results.push_back({{"algorithm", row.algorithm},
                       {"T", row.horizon},
                       {"mean_regret", round6(row.mean_regret)},
                       {"std_regret", round6(row.std_regret)},
                       {"mean_batches", round6(row.mean_batches)},
                       {"min_batches", row.min_batches},
                       {"max_batches", row.max_batches}});
  }
  doc["results"] = std::move(results);
  return doc;
}

}  // namespace batchts
