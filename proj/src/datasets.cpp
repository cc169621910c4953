#include "batchts/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace batchts {

namespace {

Eigen::ArrayXd to_array(std::initializer_list<double> values) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) a[i++] = v;
  return a;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"DS1", "DS2", "DS3", "DS4", "DS5", "DS6"};
  return names;
}

BanditInstance builtin_instance(const std::string& name) {
  if (name == "DS1") return {"DS1", to_array({0.9, 0.6})};
  if (name == "DS2") return {"DS2", to_array({0.9, 0.8})};
  if (name == "DS3") return {"DS3", to_array({0.55, 0.45})};
  if (name == "DS4") {
    // one best arm, nine runners-up
    Eigen::ArrayXd means = Eigen::ArrayXd::Constant(10, 0.8);
    means[0] = 0.9;
    return {"DS4", means};
  }
  if (name == "DS5") {
    // uniformly spaced: 0.9, 0.85, ..., 0.45
    Eigen::ArrayXd means(10);
    for (int i = 0; i < 10; ++i) means[i] = 0.9 - static_cast<double>(i) / 20.0;
    return {"DS5", means};
  }
  if (name == "DS6") {
    return {"DS6", to_array({0.9, 0.8, 0.8, 0.8, 0.7, 0.7, 0.7, 0.6, 0.6, 0.6})};
  }
  std::string valid;
  for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw UsageError("unknown dataset '" + name + "'; valid names: " + valid);
}

namespace {

std::vector<std::string> split_row(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) fields.push_back(field);
  if (!line.empty() && line.back() == delimiter) fields.emplace_back();
  return fields;
}

std::string strip(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

BanditInstance movielens_instance(const std::string& path, std::int64_t min_ratings,
                                  double rating_scale, const RatingsSchema& schema) {
  if (min_ratings < 1) throw UsageError("min_ratings must be >= 1");
  if (!(rating_scale > 0.0)) throw UsageError("rating_scale must be positive");
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ratings file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw InputError("ratings file '" + path + "' is empty");
  const auto header = split_row(line, schema.delimiter);
  std::ptrdiff_t movie_col = -1, rating_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = strip(header[i]);
    if (name == schema.movie_column) movie_col = static_cast<std::ptrdiff_t>(i);
    if (name == schema.rating_column) rating_col = static_cast<std::ptrdiff_t>(i);
  }
  if (movie_col < 0 || rating_col < 0) {
    throw InputError("ratings file '" + path + "' header lacks columns '" +
                     schema.movie_column + "'/'" + schema.rating_column + "'");
  }

  struct Tally {
    std::int64_t count = 0;
    double sum = 0.0;
  };
  std::map<std::int64_t, Tally> by_movie;
  std::int64_t rows = 0, skipped = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    ++rows;
    const auto fields = split_row(line, schema.delimiter);
    if (static_cast<std::ptrdiff_t>(fields.size()) <= std::max(movie_col, rating_col)) {
      ++skipped;
      continue;
    }
    try {
      const std::int64_t movie = std::stoll(strip(fields[movie_col]));
      const double rating = std::stod(strip(fields[rating_col]));
      auto& tally = by_movie[movie];
      ++tally.count;
      tally.sum += rating;
    } catch (const std::exception&) {
      ++skipped;
    }
  }

  struct Arm {
    std::int64_t movie;
    double mean;
  };
  std::vector<Arm> arms;
  for (const auto& [movie, tally] : by_movie) {
    if (tally.count >= min_ratings) {
      const double mean = std::clamp(tally.sum / static_cast<double>(tally.count) / rating_scale,
                                     0.0, 1.0);
      arms.push_back({movie, mean});
    }
  }
  if (arms.size() < 2) {
    throw InputError("ratings file '" + path + "' yields " + std::to_string(arms.size()) +
                     " arm(s) at min_ratings=" + std::to_string(min_ratings) +
                     " (parsed " + std::to_string(rows) + " rows, " +
                     std::to_string(by_movie.size()) + " movies, skipped " +
                     std::to_string(skipped) + "); an instance needs at least 2 arms");
  }
  std::stable_sort(arms.begin(), arms.end(), [](const Arm& a, const Arm& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.movie < b.movie;
  });
  Eigen::ArrayXd means(static_cast<Eigen::Index>(arms.size()));
  for (std::size_t i = 0; i < arms.size(); ++i) means[static_cast<Eigen::Index>(i)] = arms[i].mean;
  return {std::filesystem::path(path).stem().string(), means};
}

BanditInstance load_instance_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("instance file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.contains("means") || !doc["means"].is_array()) {
    throw InputError("instance file '" + path + "' lacks a 'means' array");
  }
  const auto& means_json = doc["means"];
  Eigen::ArrayXd means(static_cast<Eigen::Index>(means_json.size()));
  for (std::size_t i = 0; i < means_json.size(); ++i) {
    means[static_cast<Eigen::Index>(i)] = means_json[i].get<double>();
  }
  const std::string name = doc.value("name", std::filesystem::path(path).stem().string());
  return {name, means};
}

void save_instance_json(const BanditInstance& instance, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["name"] = instance.name();
  doc["means"] = std::vector<double>(instance.means().data(),
                                     instance.means().data() + instance.means().size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write instance file '" + path + "'");
  out << doc.dump(2) << "\n";
}

BanditInstance resolve_dataset(const std::string& name_or_path) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin_instance(name_or_path);
  }
  if (std::filesystem::exists(name_or_path)) return load_instance_json(name_or_path);
  std::string valid;
  for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
  throw UsageError("dataset '" + name_or_path + "' is neither a builtin name (" + valid +
                   ") nor an existing instance file");
}

}  // namespace batchts
