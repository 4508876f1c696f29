#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/feature.hpp"
#include "sonoforge/training.hpp"

namespace sonoforge::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
};

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// <stem>.<kind>.ftr
std::filesystem::path feature_path(const std::filesystem::path& dir, const std::filesystem::path& wav,
                                   FeatureKind kind);

/// Loads the feature file of every index entry. Missing files raise
/// MissingFile naming the extract command; differing shapes raise Geometry.
/// Nothing is returned unless every file loads.
FeatureDataset load_feature_set(const DatasetIndex& index, const std::filesystem::path& dir, FeatureKind kind);

/// Files ending in .report inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_reports(const std::filesystem::path& dir);

}  // namespace sonoforge::cli
