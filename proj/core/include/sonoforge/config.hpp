#pragma once

#include <filesystem>
#include <string>

#include "sonoforge/feature.hpp"
#include "sonoforge/training.hpp"

namespace sonoforge {

/// Contents of a run configuration file. The file is INI-like:
///
///   [dataset]
///   csv = meta/esc50.csv
///   audio_dir = audio
///
/// with sections dataset, dsp, features, training and output. Unknown
/// sections or keys are rejected. Relative paths resolve against the
/// directory holding the config file.
struct CliConfig {
  std::filesystem::path dataset_csv;
  std::filesystem::path audio_dir;
  FeatureConfig features;
  TrainConfig training;
  std::filesystem::path features_dir = "features";
  std::filesystem::path runs_dir = "runs";
};

CliConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
CliConfig load_config(const std::filesystem::path& path);
std::string format_config(const CliConfig& config);

}  // namespace sonoforge
