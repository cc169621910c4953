#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "batchts/core.hpp"

namespace batchts {

/// Names of the built-in synthetic instances, DS1 through DS6.
const std::vector<std::string>& builtin_names();

/// Returns the named built-in instance; unknown names raise a UsageError
/// listing the valid ones.
BanditInstance builtin_instance(const std::string& name);

/// Column mapping for delimiter-separated ratings files. Snapshots of the
/// MovieLens corpus differ in layout, so the names are configurable.
struct RatingsSchema {
  std::string movie_column = "movieId";
  std::string rating_column = "rating";
  char delimiter = ',';
};

/// Builds a bandit instance from a ratings file with a header row: one arm
/// per movie with at least min_ratings ratings, mean = (average rating) /
/// rating_scale clamped to [0,1], arms ordered by descending mean then
/// ascending movie id.
BanditInstance movielens_instance(const std::string& path, std::int64_t min_ratings = 20000,
                                  double rating_scale = 5.0, const RatingsSchema& schema = {});

/// Instance files written by the ingest command: a JSON object with
/// schema_version, name, and means.
BanditInstance load_instance_json(const std::string& path);
void save_instance_json(const BanditInstance& instance, const std::string& path);

/// Resolves a --dataset argument: a builtin name or a path to an instance
/// JSON file.
BanditInstance resolve_dataset(const std::string& name_or_path);

}  // namespace batchts
