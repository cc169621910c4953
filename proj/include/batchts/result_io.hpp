#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "batchts/simulator.hpp"

namespace batchts {

/// Locale-independent rendering with 6 significant digits (%.6g); integral
/// values print without an exponent where they fit.
std::string format_number(double value);

/// Rounds to 6 significant digits so CSV and JSON carry identical values.
double round6(double value);

/// Everything that identifies a run in emitted files. threads is excluded on
/// purpose: output bytes must not depend on parallelism.
struct RunDescription {
  std::string dataset;
  std::string algorithm;  // variant spelling, e.g. "btsd-"
  std::int64_t horizon = 0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double beta = 0.0;  // +inf emitted as "inf"
  int rounds = 0;
  bool skip_init = false;
  bool theory_alpha = false;
};

/// run output, CSV: header t,mean_regret,std_regret; one row per checkpoint;
/// then one summary row "batches,<mean>,<std>". LF endings, UTF-8.
void write_run_csv(std::ostream& out, const AggregateResult& result);

/// run output, JSON: {"spec": {...}, "results": {...}} with checkpoint
/// curves, batch statistics, and per-replication final regrets.
nlohmann::ordered_json run_result_json(const RunDescription& desc,
                                       const AggregateResult& result);

/// One sweep cell (algorithm x horizon).
struct SweepRow {
  std::string algorithm;
  std::int64_t horizon = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  double mean_batches = 0.0;
  std::int64_t min_batches = 0;
  std::int64_t max_batches = 0;
};

/// sweep output, CSV: long-format table
/// algorithm,T,mean_regret,std_regret,mean_batches,min_batches,max_batches.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

nlohmann::ordered_json sweep_result_json(const nlohmann::ordered_json& spec,
                                         std::span<const SweepRow> rows);

}  // namespace batchts
