#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sonoforge/audio_io.hpp"

namespace sonoforge {

/// Pure tone amplitude * sin(2 pi f t + phase).
AudioClip sine(double freq_hz, double seconds, int sample_rate_hz, double amplitude = 0.5, double phase = 0.0);
/// Sum of pure tones with equal amplitude.
AudioClip tones(const std::vector<double>& freqs_hz, double seconds, int sample_rate_hz, double amplitude = 0.25);
/// Unit impulses (with a short exponential decay) every 60/bpm seconds,
/// the first at `offset_s`.
AudioClip click_train(double bpm, double seconds, int sample_rate_hz, double offset_s = 0.1);

struct SynthClass {
  int target;
  std::string category;
};

/// Ten environmental-sound classes (ESC-50 target ids and names) produced by
/// parametric generators with per-clip random pitch, timing and gain.
const std::vector<SynthClass>& synth_classes();

/// One clip of class slot `slot` (index into synth_classes()).
AudioClip synthesize_clip(std::size_t slot, std::uint64_t seed, int sample_rate_hz = 44100,
                          double seconds = kClipSeconds);

struct SynthCorpusOptions {
  std::size_t n_classes = 10;
  std::size_t clips_per_class = 40;
  int sample_rate_hz = 44100;
  std::uint64_t seed = 0;
};

/// Writes <root>/audio/*.wav (PCM16) and <root>/meta/esc50.csv in the ESC-50
/// column layout, then returns the loaded index.
DatasetIndex write_synthetic_corpus(const std::filesystem::path& root, const SynthCorpusOptions& options);

}  // namespace sonoforge
