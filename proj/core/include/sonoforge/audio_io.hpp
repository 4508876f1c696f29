#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sonoforge {

inline constexpr int kCanonicalRateHz = 22050;
inline constexpr double kClipSeconds = 5.0;
inline constexpr int kNumClasses = 50;

/// Mono clip. `label` is -1 and `fold` 0 when the clip was loaded outside a
/// dataset index.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 0;
  int label = -1;
  int fold = 0;
  std::string source_name;

  double duration_seconds() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

struct IndexEntry {
  std::filesystem::path path;
  int label = 0;
  int fold = 1;
  std::string category;
};

struct DatasetIndex {
  std::vector<IndexEntry> entries;
  /// class_names[label]; empty string for labels not present in the index.
  std::vector<std::string> class_names;

  std::size_t num_classes() const;
};

/// Decodes a RIFF/WAVE file (PCM16 or float32, mono or stereo) into a mono
/// clip. Stereo frames are averaged.
AudioClip load_wav(const std::filesystem::path& path);
AudioClip decode_wav(const std::vector<std::uint8_t>& bytes, std::string source_name = {});

void write_wav_float32(const AudioClip& clip, const std::filesystem::path& path);
void write_wav_pcm16(const AudioClip& clip, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav_float32(const AudioClip& clip);
std::vector<std::uint8_t> encode_wav_pcm16(const AudioClip& clip);

/// Band-limited polyphase windowed-sinc resampling. Output length is
/// round(n * target / source); equal rates return the input unchanged.
AudioClip resample(const AudioClip& clip, int target_rate_hz);

/// Resamples to `rate_hz` and pads with zeros / truncates to exactly
/// kClipSeconds.
AudioClip canonicalize(const AudioClip& clip, int rate_hz = kCanonicalRateHz);

/// Reads an ESC-50 style metadata CSV. Requires the columns filename, fold,
/// target and category; other columns are ignored.
DatasetIndex load_index(const std::filesystem::path& csv_path,
                        const std::filesystem::path& audio_dir);

/// Stricter check for the full corpus: labels must be exactly 0..49.
void validate_full_corpus(const DatasetIndex& index);

}  // namespace sonoforge
