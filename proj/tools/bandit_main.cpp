// Command-line front end: run one experiment, sweep a grid of horizons and
// algorithms, list the built-in datasets, or ingest a ratings file into an
// instance. Exit codes: 0 success, 2 usage error, 3 input error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "batchts/datasets.hpp"
#include "batchts/result_io.hpp"
#include "batchts/simulator.hpp"

namespace {

using batchts::InputError;
using batchts::UsageError;

struct CommonSettings {
  std::string dataset = "DS1";
  int reps = 100;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  double beta = 100.0;
  int rounds = 20;
  bool no_prune = false;
  bool skip_init = false;
  bool theory_alpha = false;
  int threads = 0;
  double confidence_scale = 1.0;
  double iucb_pull_scale = 2.0;
  double iucb_radius_scale = 1.0;
  std::vector<std::int64_t> checkpoints;
  std::string format = "csv";
  std::string out = "-";
};

struct RunSettings : CommonSettings {
  std::string algorithm = "btsd";
  std::int64_t horizon = 10000;
};

struct SweepSettings : CommonSettings {
  std::vector<std::string> algorithms;
  std::vector<std::int64_t> horizons;
  std::string rounds_rule = "fixed";  // fixed | log2 | loglog
};

void check_schema_version(const nlohmann::json& doc, const std::string& path) {
  if (doc.contains("schema_version") && doc["schema_version"].get<int>() != 1) {
    throw UsageError("config '" + path + "' has unsupported schema_version");
  }
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
  check_schema_version(doc, path);
  return doc;
}

template <typename T>
void take(const nlohmann::json& doc, const char* key, T& into) {
  if (doc.contains(key)) into = doc[key].get<T>();
}

void apply_common_config(const nlohmann::json& doc, CommonSettings& s) {
  take(doc, "dataset", s.dataset);
  take(doc, "reps", s.reps);
  take(doc, "seed", s.seed);
  take(doc, "alpha", s.alpha);
  if (doc.contains("beta")) {
    if (doc["beta"].is_string()) {
      if (doc["beta"].get<std::string>() != "inf") {
        throw UsageError("config beta must be a number or \"inf\"");
      }
      s.beta = std::numeric_limits<double>::infinity();
    } else {
      s.beta = doc["beta"].get<double>();
    }
  }
  take(doc, "rounds", s.rounds);
  take(doc, "no_prune", s.no_prune);
  take(doc, "skip_init", s.skip_init);
  take(doc, "theory_alpha", s.theory_alpha);
  take(doc, "threads", s.threads);
  take(doc, "confidence_scale", s.confidence_scale);
  take(doc, "iucb_pull_scale", s.iucb_pull_scale);
  take(doc, "iucb_radius_scale", s.iucb_radius_scale);
  take(doc, "checkpoints", s.checkpoints);
  take(doc, "format", s.format);
  take(doc, "out", s.out);
}

const std::vector<std::string> kCommonKeys = {
    "schema_version", "dataset",          "reps",          "seed",
    "alpha",          "beta",             "rounds",        "no_prune",
    "skip_init",      "theory_alpha",     "threads",       "confidence_scale",
    "iucb_pull_scale", "iucb_radius_scale", "checkpoints", "format",
    "out"};

void reject_unknown_keys(const nlohmann::json& doc, std::vector<std::string> extra,
                         const std::string& path) {
  extra.insert(extra.end(), kCommonKeys.begin(), kCommonKeys.end());
  for (const auto& [key, value] : doc.items()) {
    if (std::find(extra.begin(), extra.end(), key) == extra.end()) {
      throw UsageError("config '" + path + "' has unknown key '" + key + "'");
    }
  }
}

int resolve_rounds(const std::string& rule, int fixed_rounds, std::int64_t horizon) {
  if (rule == "fixed") return fixed_rounds;
  const double log2_t = std::log2(static_cast<double>(horizon));
  if (rule == "log2") return std::max(1, static_cast<int>(std::ceil(log2_t)));
  if (rule == "loglog") {
    return std::max(1, static_cast<int>(std::ceil(std::log2(log2_t))) - 1);
  }
  throw UsageError("unknown rounds rule '" + rule + "'; expected fixed, log2, or loglog");
}

batchts::ExperimentSpec build_spec(const batchts::BanditInstance& instance,
                                   const CommonSettings& s, const std::string& algorithm,
                                   std::int64_t horizon, int rounds) {
  const auto variant = batchts::parse_algorithm_variant(algorithm);
  batchts::ExperimentSpec spec{instance, {}, horizon, s.reps, s.seed, s.checkpoints, s.threads};
  spec.algorithm.kind = variant.kind;
  spec.algorithm.policy.alpha = s.alpha;
  spec.algorithm.policy.beta =
      (variant.no_prune || s.no_prune) ? std::numeric_limits<double>::infinity() : s.beta;
  spec.algorithm.policy.num_rounds = rounds;
  spec.algorithm.policy.skip_init_batch =
      s.skip_init && variant.kind == batchts::Algorithm::btsi;
  spec.algorithm.policy.theory_alpha = s.theory_alpha;
  spec.algorithm.elim.num_rounds = rounds;
  spec.algorithm.elim.confidence_scale = s.confidence_scale;
  spec.algorithm.iucb.pull_scale = s.iucb_pull_scale;
  spec.algorithm.iucb.radius_scale = s.iucb_radius_scale;
  return spec;
}

std::string variant_name(const CommonSettings& s, const std::string& algorithm) {
  const auto variant = batchts::parse_algorithm_variant(algorithm);
  std::string name = batchts::algorithm_name(variant.kind);
  const bool ts_family =
      variant.kind == batchts::Algorithm::btsd || variant.kind == batchts::Algorithm::btsi;
  if (ts_family && (variant.no_prune || s.no_prune)) name += "-";
  return name;
}

void write_output(const std::string& out, const std::string& content) {
  if (out == "-") {
    std::cout << content;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw InputError("cannot write output file '" + out + "'");
  file << content;
}

int run_command(const RunSettings& s) {
  if (s.format != "csv" && s.format != "json") {
    throw UsageError("format must be csv or json");
  }
  const auto instance = batchts::resolve_dataset(s.dataset);
  const int rounds = s.rounds;
  const auto spec = build_spec(instance, s, s.algorithm, s.horizon, rounds);
  const auto result = batchts::run_experiment(spec);

  std::ostringstream buffer;
  if (s.format == "csv") {
    batchts::write_run_csv(buffer, result);
  } else {
    batchts::RunDescription desc;
    desc.dataset = instance.name();
    desc.algorithm = variant_name(s, s.algorithm);
    desc.horizon = s.horizon;
    desc.repetitions = s.reps;
    desc.seed = s.seed;
    desc.alpha = spec.algorithm.policy.alpha;
    desc.beta = spec.algorithm.policy.beta;
    desc.rounds = rounds;
    desc.skip_init = spec.algorithm.policy.skip_init_batch;
    desc.theory_alpha = spec.algorithm.policy.theory_alpha;
    buffer << batchts::run_result_json(desc, result).dump(2) << "\n";
  }
  write_output(s.out, buffer.str());
  return 0;
}

int sweep_command(const SweepSettings& s) {
  if (s.format != "csv" && s.format != "json") {
    throw UsageError("format must be csv or json");
  }
  if (s.algorithms.empty()) throw UsageError("sweep needs a nonempty algorithm list");
  if (s.horizons.empty()) throw UsageError("sweep needs a nonempty horizon list");
  const auto instance = batchts::resolve_dataset(s.dataset);

  std::vector<batchts::SweepRow> rows;
  for (const auto& algorithm : s.algorithms) {
    for (const auto horizon : s.horizons) {
      const int rounds = resolve_rounds(s.rounds_rule, s.rounds, horizon);
      const auto spec = build_spec(instance, s, algorithm, horizon, rounds);
      const auto result = batchts::run_experiment(spec);
      batchts::SweepRow row;
      row.algorithm = variant_name(s, algorithm);
      row.horizon = horizon;
      const Eigen::Index last = result.mean_regret.size() - 1;
      row.mean_regret = result.mean_regret[last];
      row.std_regret = result.std_regret[last];
      row.mean_batches = result.mean_batches;
      row.min_batches = result.min_batches;
      row.max_batches = result.max_batches;
      rows.push_back(std::move(row));
    }
  }

  std::ostringstream buffer;
  if (s.format == "csv") {
    batchts::write_sweep_csv(buffer, rows);
  } else {
    nlohmann::ordered_json spec_json;
    spec_json["schema_version"] = 1;
    spec_json["dataset"] = instance.name();
    spec_json["algorithms"] = s.algorithms;
    spec_json["horizons"] = s.horizons;
    spec_json["reps"] = s.reps;
    spec_json["seed"] = s.seed;
    spec_json["alpha"] = s.alpha;
    if (std::isinf(s.beta)) {
      spec_json["beta"] = "inf";
    } else {
      spec_json["beta"] = s.beta;
    }
    spec_json["rounds"] = s.rounds;
    spec_json["rounds_rule"] = s.rounds_rule;
    buffer << batchts::sweep_result_json(spec_json, rows).dump(2) << "\n";
  }
  write_output(s.out, buffer.str());
  return 0;
}

int datasets_command() {
  for (const auto& name : batchts::builtin_names()) {
    const auto instance = batchts::builtin_instance(name);
    double min_gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < instance.gaps().size(); ++i) {
      if (instance.gaps()[i] > 0.0) min_gap = std::min(min_gap, instance.gaps()[i]);
    }
    std::cout << name << ", " << instance.num_arms() << " arms, Δ = "
              << batchts::format_number(min_gap) << ", means = [";
    for (Eigen::Index i = 0; i < instance.means().size(); ++i) {
      std::cout << (i ? ", " : "") << batchts::format_number(instance.means()[i]);
    }
    std::cout << "]\n";
  }
  return 0;
}

struct IngestSettings {
  std::string ratings;
  std::int64_t min_ratings = 20000;
  double scale = 5.0;
  std::string movie_col = "movieId";
  std::string rating_col = "rating";
  std::string delimiter = ",";
  std::string out;
};

int ingest_command(const IngestSettings& s) {
  if (s.delimiter.size() != 1) throw UsageError("delimiter must be a single character");
  batchts::RatingsSchema schema{s.movie_col, s.rating_col, s.delimiter[0]};
  const auto instance = batchts::movielens_instance(s.ratings, s.min_ratings, s.scale, schema);
  batchts::save_instance_json(instance, s.out);
  std::cout << instance.name() << ": " << instance.num_arms()
            << " arms written to " << s.out << " (best mean "
            << batchts::format_number(instance.best_mean()) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batched Thompson sampling bandit simulator and benchmark harness"};
  app.require_subcommand(1);

  RunSettings run_settings;
  SweepSettings sweep_settings;
  IngestSettings ingest_settings;
  std::string run_config_path, sweep_config_path;
  std::string sweep_algorithms_csv, sweep_horizons_csv;

  auto add_common = [](CLI::App* cmd, CommonSettings& s) {
    cmd->add_option("--dataset", s.dataset, "builtin dataset name or instance JSON path");
    cmd->add_option("--reps", s.reps, "number of replications");
    cmd->add_option("--seed", s.seed, "master seed");
    cmd->add_option("--alpha", s.alpha, "belief variance scale");
    cmd->add_option("--beta", s.beta, "pruning ratio (>= 1)");
    cmd->add_option("--rounds", s.rounds, "batch rounds M");
    cmd->add_flag("--no-prune", s.no_prune, "disable pruning (beta = inf)");
    cmd->add_flag("--skip-init", s.skip_init, "merge the init batch into the first grid batch (btsi)");
    cmd->add_flag("--theory-alpha", s.theory_alpha, "use alpha = ln(2T)");
    cmd->add_option("--threads", s.threads, "worker threads (0 = all cores); never affects results");
    cmd->add_option("--confidence-scale", s.confidence_scale, "elimination radius scale");
    cmd->add_option("--checkpoints", s.checkpoints, "regret checkpoint times")->delimiter(',');
    cmd->add_option("--format", s.format, "csv or json");
    cmd->add_option("--out", s.out, "output path ('-' = stdout)");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", run_config_path, "JSON config file");
  run->add_option("--algorithm", run_settings.algorithm, "algorithm name");
  run->add_option("--horizon", run_settings.horizon, "total pulls T");
  add_common(run, run_settings);

  CLI::App* sweep = app.add_subcommand("sweep", "run an algorithm x horizon grid");
  sweep->add_option("--config", sweep_config_path, "JSON config file");
  sweep->add_option("--algorithms", sweep_algorithms_csv, "comma-separated algorithm names");
  sweep->add_option("--horizons", sweep_horizons_csv, "comma-separated horizons");
  sweep->add_option("--rounds-rule", sweep_settings.rounds_rule,
                    "fixed, log2 (M = ceil(log2 T)), or loglog (M = max(1, ceil(log2 log2 T) - 1))");
  add_common(sweep, sweep_settings);

  app.add_subcommand("datasets", "list the builtin datasets");

  CLI::App* ingest = app.add_subcommand("ingest", "build an instance from a ratings file");
  ingest->add_option("--ratings", ingest_settings.ratings, "ratings file path")->required();
  ingest->add_option("--min-ratings", ingest_settings.min_ratings, "minimum ratings per movie");
  ingest->add_option("--scale", ingest_settings.scale, "rating scale divisor");
  ingest->add_option("--movie-col", ingest_settings.movie_col, "movie id column name");
  ingest->add_option("--rating-col", ingest_settings.rating_col, "rating column name");
  ingest->add_option("--delimiter", ingest_settings.delimiter, "field delimiter");
  ingest->add_option("--out", ingest_settings.out, "instance JSON output path")->required();

  try {
    app.parse(argc, argv);

    if (run->parsed()) {
      if (!run_config_path.empty()) {
        // Precedence: defaults < config file < explicit flags. Flags were
        // already parsed into run_settings, so load the file into a fresh
        // struct and copy back only the fields the user did not set.
        const auto doc = load_config(run_config_path);
        reject_unknown_keys(doc, {"algorithm", "horizon"}, run_config_path);
        RunSettings from_file;
        apply_common_config(doc, from_file);
        take(doc, "algorithm", from_file.algorithm);
        take(doc, "horizon", from_file.horizon);
        auto keep_flag = [&](const std::string& flag, auto member) {
          if (run->count(flag) > 0) from_file.*member = run_settings.*member;
        };
        keep_flag("--dataset", &RunSettings::dataset);
        keep_flag("--reps", &RunSettings::reps);
        keep_flag("--seed", &RunSettings::seed);
        keep_flag("--alpha", &RunSettings::alpha);
        keep_flag("--beta", &RunSettings::beta);
        keep_flag("--rounds", &RunSettings::rounds);
        keep_flag("--no-prune", &RunSettings::no_prune);
        keep_flag("--skip-init", &RunSettings::skip_init);
        keep_flag("--theory-alpha", &RunSettings::theory_alpha);
        keep_flag("--threads", &RunSettings::threads);
        keep_flag("--confidence-scale", &RunSettings::confidence_scale);
        keep_flag("--checkpoints", &RunSettings::checkpoints);
        keep_flag("--format", &RunSettings::format);
        keep_flag("--out", &RunSettings::out);
        keep_flag("--algorithm", &RunSettings::algorithm);
        keep_flag("--horizon", &RunSettings::horizon);
        run_settings = from_file;
      }
      return run_command(run_settings);
    }
    if (sweep->parsed()) {
      if (!sweep_config_path.empty()) {
        const auto doc = load_config(sweep_config_path);
        reject_unknown_keys(doc, {"algorithms", "horizons", "rounds_rule"}, sweep_config_path);
        SweepSettings from_file;
        from_file.rounds_rule = sweep_settings.rounds_rule;
        apply_common_config(doc, from_file);
        take(doc, "algorithms", from_file.algorithms);
        take(doc, "horizons", from_file.horizons);
        if (doc.contains("rounds_rule")) from_file.rounds_rule = doc["rounds_rule"];
        auto keep_flag = [&](const std::string& flag, auto member) {
          if (sweep->count(flag) > 0) from_file.*member = sweep_settings.*member;
        };
        keep_flag("--dataset", &SweepSettings::dataset);
        keep_flag("--reps", &SweepSettings::reps);
        keep_flag("--seed", &SweepSettings::seed);
        keep_flag("--alpha", &SweepSettings::alpha);
        keep_flag("--beta", &SweepSettings::beta);
        keep_flag("--rounds", &SweepSettings::rounds);
        keep_flag("--no-prune", &SweepSettings::no_prune);
        keep_flag("--skip-init", &SweepSettings::skip_init);
        keep_flag("--theory-alpha", &SweepSettings::theory_alpha);
        keep_flag("--threads", &SweepSettings::threads);
        keep_flag("--confidence-scale", &SweepSettings::confidence_scale);
        keep_flag("--checkpoints", &SweepSettings::checkpoints);
        keep_flag("--format", &SweepSettings::format);
        keep_flag("--out", &SweepSettings::out);
        if (sweep->count("--rounds-rule") > 0) from_file.rounds_rule = sweep_settings.rounds_rule;
        sweep_settings = from_file;
      }
      if (sweep->count("--algorithms") > 0 || !sweep_algorithms_csv.empty()) {
        sweep_settings.algorithms.clear();
        std::istringstream in(sweep_algorithms_csv);
        std::string item;
        while (std::getline(in, item, ',')) {
          if (!item.empty()) sweep_settings.algorithms.push_back(item);
        }
      }
      if (sweep->count("--horizons") > 0 || !sweep_horizons_csv.empty()) {
        sweep_settings.horizons.clear();
        std::istringstream in(sweep_horizons_csv);
        std::string item;
        while (std::getline(in, item, ',')) {
          if (!item.empty()) sweep_settings.horizons.push_back(std::stoll(item));
        }
      }
      return sweep_command(sweep_settings);
    }
    if (app.get_subcommand("datasets")->parsed()) {
      return datasets_command();
    }
    if (ingest->parsed()) {
      return ingest_command(ingest_settings);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
