#pragma once

#include <span>
#include <vector>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/dsp.hpp"
#include "sonoforge/feature.hpp"

namespace sonoforge {

inline constexpr int kPitchClasses = 12;
/// C0 in twelve-tone equal temperament with A4 = 440 Hz.
inline constexpr double kC0Hz = 16.3516;

/// Pitch class (0 = C ... 11 = B) of the semitone nearest to `hz`.
int pitch_class(double hz);

/// STFT chromagram: every bin's power goes to its nearest pitch class, then
/// each frame is scaled to a maximum of 1.
FeatureMatrix chroma_stft(const AudioClip& clip, const StftParams& params = {});

struct CqtParams {
  double fmin_hz = 32.7032;  // C1
  int n_bins = 84;
  int bins_per_octave = 12;
  std::size_t hop = 512;
};

/// One Hann-windowed complex exponential per constant-Q bin.
class CqtKernelBank {
 public:
  CqtKernelBank(int sample_rate_hz, const CqtParams& params);

  double q_factor() const noexcept { return q_; }
  int bins_per_octave() const noexcept { return bins_per_octave_; }
  double fmin_hz() const noexcept { return fmin_hz_; }
  std::size_t n_bins() const noexcept { return center_freqs_hz_.size(); }
  const std::vector<double>& center_freqs_hz() const noexcept { return center_freqs_hz_; }
  std::vector<double> bandwidths_hz() const;
  /// Atoms are normalized to unit L1 window mass.
  const std::vector<std::vector<Complex>>& atoms() const noexcept { return atoms_; }

 private:
  double q_;
  int bins_per_octave_;
  double fmin_hz_;
  std::vector<double> center_freqs_hz_;
  std::vector<std::vector<Complex>> atoms_;
};

/// Constant-Q transform [n_bins, n_frames]; frame j is centered on sample
/// j * hop and the signal is zero outside its support.
ComplexMatrix cqt(std::span<const double> samples, int sample_rate_hz, const CqtParams& params = {});
ComplexMatrix cqt(std::span<const double> samples, const CqtKernelBank& bank, std::size_t hop);

/// Octave fold of |CQT| into 12 classes by the pitch class of each bin's
/// center frequency, before any normalization.
RealMatrix fold_octaves(const ComplexMatrix& cqt_matrix, std::span<const double> center_freqs_hz);

FeatureMatrix chroma_cqt(const AudioClip& clip, const CqtParams& params = {});

inline constexpr double kCensThresholds[] = {0.05, 0.1, 0.2, 0.4};

/// Quantization code in {0..4}: number of thresholds strictly below v.
int cens_code(double v) noexcept;

/// CENS post-processing of a 12-row chromagram: L1 normalize, quantize,
/// Hann-smooth along time, downsample, L2 normalize.
RealMatrix cens(const RealMatrix& chroma, int smooth_len = 41, int downsample = 10);

/// CENS over the raw octave-folded CQT of the clip.
FeatureMatrix chroma_cens(const AudioClip& clip, int smooth_len = 41, int downsample = 1,
                          const CqtParams& params = {});

}  // namespace sonoforge
