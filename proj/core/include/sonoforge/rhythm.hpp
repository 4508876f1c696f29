#pragma once

#include <vector>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/feature.hpp"
#include "sonoforge/mel.hpp"

namespace sonoforge {

struct NoveltyCurve {
  std::vector<double> values;
  double frame_rate_hz = 0.0;
};

/// Half-wave rectified spectral flux of the dB mel spectrogram. The first
/// frame is 0.
NoveltyCurve onset_novelty(const AudioClip& clip, const MelParams& params = {});
NoveltyCurve spectral_flux(const RealMatrix& db_spectrogram, double frame_rate_hz);

/// Hann-windowed local autocorrelation, lags 0..win_len-1 per frame, each
/// column divided by its lag-0 value. Result is [win_len, n_frames].
RealMatrix autocorrelation_tempogram(const NoveltyCurve& novelty, int win_len);

struct CyclicTempogramParams {
  double ref_tempo_bpm = 60.0;
  int n_tempo_bins = 64;
  int win_len = 384;
  // Tempo octaves intersecting [min_bpm, max_bpm) are folded together.
  double min_bpm = 30.0;
  double max_bpm = 480.0;
};

/// Folds an autocorrelation tempogram onto one tempo octave [ref, 2 ref)
/// sampled at n_tempo_bins log-spaced points. Row i sits at
/// ref * 2^(i / n_tempo_bins).
RealMatrix fold_tempogram(const RealMatrix& lag_tempogram, double frame_rate_hz,
                          const CyclicTempogramParams& params);

/// Row index of a tempo in a cyclic tempogram (nearest grid point, wrapped).
int cyclic_tempo_bin(double bpm, double ref_tempo_bpm, int n_tempo_bins);

FeatureMatrix cyclic_tempogram(const AudioClip& clip, const CyclicTempogramParams& params = {},
                               const MelParams& mel = {});

}  // namespace sonoforge
