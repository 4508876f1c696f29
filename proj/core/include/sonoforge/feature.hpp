#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/matrix.hpp"

namespace sonoforge {

enum class FeatureKind : std::uint8_t {
  Mel = 0,
  Mfcc = 1,
  Tempogram = 2,
  ChromaStft = 3,
  ChromaCqt = 4,
  ChromaCens = 5,
};

inline constexpr FeatureKind kAllFeatureKinds[] = {
    FeatureKind::Mel,        FeatureKind::Mfcc,      FeatureKind::Tempogram,
    FeatureKind::ChromaStft, FeatureKind::ChromaCqt, FeatureKind::ChromaCens,
};

/// CLI spelling: mel, mfcc, tempogram, chroma-stft, chroma-cqt, chroma-cens.
std::string_view to_string(FeatureKind kind) noexcept;
std::optional<FeatureKind> parse_feature_kind(std::string_view text) noexcept;
/// Long human-readable name used in comparison tables.
std::string_view display_name(FeatureKind kind) noexcept;

struct FeatureParams {
  std::uint32_t sample_rate_hz = kCanonicalRateHz;
  std::uint32_t n_fft = 2048;
  std::uint32_t hop = 512;

  friend bool operator==(const FeatureParams&, const FeatureParams&) = default;
};

struct FeatureMatrix {
  RealMatrix values;  // [n_features, n_frames]
  FeatureKind kind = FeatureKind::Mel;
  FeatureParams params;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
};

/// Throws NonFinite / Shape if the matrix violates the FeatureMatrix
/// invariants (finite values, at least one row and column).
void check_feature(const FeatureMatrix& f);

/// Per-kind tunables. Defaults are the experiment defaults.
struct FeatureConfig {
  int sample_rate_hz = kCanonicalRateHz;
  std::uint32_t n_fft = 2048;
  std::uint32_t hop = 512;
  int n_mels = 128;
  int n_mfcc = 40;
  int tempogram_win_len = 384;
  double tempogram_ref_bpm = 60.0;
  int tempogram_bins = 64;
  double cqt_fmin_hz = 32.7032;
  int cqt_bins = 84;
  int cqt_bins_per_octave = 12;
  int cens_smooth_len = 41;
  int cens_downsample = 1;
};

/// Canonicalizes the clip (rate and length) and computes one feature image.
FeatureMatrix extract_feature(const AudioClip& clip, FeatureKind kind, const FeatureConfig& config = {});

}  // namespace sonoforge
