#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sonoforge/feature.hpp"
#include "sonoforge/model.hpp"

namespace sonoforge {

/// FTR1 layout (little-endian): "FTR1", kind u8, rows u32, cols u32,
/// sample_rate u32, n_fft u32, hop u32, then rows*cols float32 row-major.
inline constexpr std::size_t kFeatureHeaderBytes = 25;

/// Values are stored as float32; doubles are rounded on the way out.
std::vector<std::uint8_t> encode_feature(const FeatureMatrix& f);
FeatureMatrix decode_feature(const std::vector<std::uint8_t>& bytes);
void save_feature(const FeatureMatrix& f, const std::filesystem::path& path);
FeatureMatrix load_feature(const std::filesystem::path& path);

/// Binary 8-bit PGM, min-max scaled, highest feature bin on the top row.
std::vector<std::uint8_t> encode_pgm(const FeatureMatrix& f);
void render_pgm(const FeatureMatrix& f, const std::filesystem::path& path);

/// SFM1 layout: "SFM1", u32 manifest byte length, manifest text, then every
/// tensor listed in the manifest as little-endian float32, in order.
std::vector<std::uint8_t> encode_checkpoint(const Model& model);
Model decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path);

}  // namespace sonoforge
