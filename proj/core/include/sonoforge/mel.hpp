#pragma once

#include <span>
#include <vector>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/dsp.hpp"
#include "sonoforge/feature.hpp"

namespace sonoforge {

/// Mel scale that is linear below 1 kHz (3 f / 200) and logarithmic above
/// (27 mel per factor 6.4 in frequency).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MelFilterBank {
  RealMatrix weights;  // [n_mels, n_fft/2 + 1]
  std::vector<double> breakpoints_hz;  // n_mels + 2 triangle corners
  int sample_rate_hz = 0;
  std::size_t n_fft = 0;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;

  std::size_t n_mels() const noexcept { return weights.rows(); }
  /// Frequency of the triangle apex of each filter.
  std::vector<double> peak_frequencies_hz() const;
};

/// Triangular filters between consecutive mel-spaced breakpoints. Each row
/// is scaled so that sum_bins(weight) * bin_width_hz == 1.
MelFilterBank build_mel_filterbank(int sample_rate_hz, std::size_t n_fft, int n_mels, double fmin_hz,
                                   double fmax_hz);

struct MelParams {
  StftParams stft;
  int n_mels = 128;
  double fmin_hz = 0.0;
  double fmax_hz = -1.0;  // negative: Nyquist
};

/// bank x power spectrogram, no dB scaling.
RealMatrix mel_power(std::span<const double> samples, int sample_rate_hz, const MelParams& params);

/// dB-scaled mel spectrogram of a canonical clip.
FeatureMatrix mel_spectrogram(const AudioClip& clip, const MelParams& params = {});

/// Orthonormal DCT-II, first n_out coefficients.
std::vector<double> dct_ii(std::span<const double> x, std::size_t n_out);

/// DCT-II of every dB mel column, keeping n_mfcc coefficients.
FeatureMatrix mfcc(const AudioClip& clip, int n_mfcc = 40, const MelParams& params = {});
FeatureMatrix mfcc_from_mel_db(const FeatureMatrix& mel_db, int n_mfcc);

}  // namespace sonoforge
