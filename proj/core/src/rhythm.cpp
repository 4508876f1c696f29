#include "sonoforge/rhythm.hpp"

#include <algorithm>
#include <cmath>

#include "sonoforge/error.hpp"

namespace sonoforge {

NoveltyCurve spectral_flux(const RealMatrix& db, double frame_rate_hz) {
  NoveltyCurve nov;
  nov.frame_rate_hz = frame_rate_hz;
  nov.values.assign(db.cols(), 0.0);
  for (std::size_t b = 0; b < db.rows(); ++b) {
    const auto row = db.row(b);
    for (std::size_t j = 1; j < row.size(); ++j) nov.values[j] += std::max(0.0, row[j] - row[j - 1]);
  }
  return nov;
}

NoveltyCurve onset_novelty(const AudioClip& clip, const MelParams& params) {
  const FeatureMatrix mel = mel_spectrogram(clip, params);
  return spectral_flux(mel.values, static_cast<double>(clip.sample_rate_hz) / static_cast<double>(params.stft.hop));
}

RealMatrix autocorrelation_tempogram(const NoveltyCurve& novelty, int win_len) {
  const std::size_t n = novelty.values.size();
  if (win_len < 2) fail(ErrorKind::Range, "win_len must be >= 2");
  const auto win = static_cast<std::size_t>(win_len);
  if (n == 0) fail(ErrorKind::EmptyOutput, "empty novelty curve");
  // win may exceed n: frames outside the curve count as zero novelty.

  const auto window = make_window({WindowKind::Hann, win});
  const auto half = static_cast<std::ptrdiff_t>(win / 2);
  RealMatrix out(win, n);
  std::vector<double> seg(win);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < win; ++i) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(j + i) - half;
      seg[i] = (src >= 0 && src < static_cast<std::ptrdiff_t>(n)) ? novelty.values[static_cast<std::size_t>(src)] * window[i] : 0.0;
    }
    double zero_lag = 0.0;
    for (double v : seg) zero_lag += v * v;
    if (zero_lag == 0.0) continue;
    for (std::size_t lag = 0; lag < win; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 0; i + lag < win; ++i) acc += seg[i] * seg[i + lag];
      out(lag, j) = acc / zero_lag;
    }
  }
  return out;
}

int cyclic_tempo_bin(double bpm, double ref_tempo_bpm, int n_tempo_bins) {
  if (!(bpm > 0.0 && ref_tempo_bpm > 0.0) || n_tempo_bins < 1) fail(ErrorKind::Range, "bad tempo arguments");
  double pos = std::log2(bpm / ref_tempo_bpm);
  pos -= std::floor(pos);
  const long bin = std::lround(pos * n_tempo_bins);
  return static_cast<int>(bin % n_tempo_bins);
}

RealMatrix fold_tempogram(const RealMatrix& lag_tempogram, double frame_rate_hz, const CyclicTempogramParams& p) {
  if (p.n_tempo_bins < 1) fail(ErrorKind::Range, "n_tempo_bins must be >= 1");
  if (!(p.ref_tempo_bpm > 0.0) || !(frame_rate_hz > 0.0)) fail(ErrorKind::Range, "tempo and frame rate must be positive");
  if (!(p.min_bpm > 0.0 && p.min_bpm < p.max_bpm)) fail(ErrorKind::Range, "need 0 < min_bpm < max_bpm");
  const std::size_t max_lag = lag_tempogram.rows() - 1;
  const int oct_lo = static_cast<int>(std::floor(std::log2(p.min_bpm / p.ref_tempo_bpm)));
  const int oct_hi = static_cast<int>(std::ceil(std::log2(p.max_bpm / p.ref_tempo_bpm)));
  const double bpm_per_lag = 60.0 * frame_rate_hz;  // tempo = bpm_per_lag / lag

  RealMatrix out(static_cast<std::size_t>(p.n_tempo_bins), lag_tempogram.cols());
  for (int i = 0; i < p.n_tempo_bins; ++i) {
    for (int o = oct_lo; o < oct_hi; ++o) {
      const double bpm = p.ref_tempo_bpm * std::exp2(o + static_cast<double>(i) / p.n_tempo_bins);
      if (bpm < p.min_bpm || bpm >= p.max_bpm) continue;
      const double lag = bpm_per_lag / bpm;
      const auto lag0 = static_cast<std::size_t>(std::floor(lag));
      if (lag0 < 1 || lag0 + 1 > max_lag) continue;
      // linear in log-tempo between the neighbouring integer lags
      const double x0 = std::log2(bpm_per_lag / static_cast<double>(lag0));
      const double x1 = std::log2(bpm_per_lag / static_cast<double>(lag0 + 1));
      const double t = (std::log2(bpm) - x0) / (x1 - x0);
      const auto r0 = lag_tempogram.row(lag0);
      const auto r1 = lag_tempogram.row(lag0 + 1);
      auto dst = out.row(static_cast<std::size_t>(i));
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += (1.0 - t) * r0[j] + t * r1[j];
    }
  }
  return out;
}

FeatureMatrix cyclic_tempogram(const AudioClip& clip, const CyclicTempogramParams& params, const MelParams& mel) {
  const NoveltyCurve nov = onset_novelty(clip, mel);
  FeatureMatrix f;
  f.kind = FeatureKind::Tempogram;
  f.params = {static_cast<std::uint32_t>(clip.sample_rate_hz), static_cast<std::uint32_t>(mel.stft.n_fft),
              static_cast<std::uint32_t>(mel.stft.hop)};
  f.values = fold_tempogram(autocorrelation_tempogram(nov, params.win_len), nov.frame_rate_hz, params);
  return f;
}

}  // namespace sonoforge
