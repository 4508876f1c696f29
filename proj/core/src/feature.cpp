#include "sonoforge/feature.hpp"

#include <cmath>

#include "sonoforge/chroma.hpp"
#include "sonoforge/error.hpp"
#include "sonoforge/mel.hpp"
#include "sonoforge/rhythm.hpp"

namespace sonoforge {

std::string_view to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::Mel: return "mel";
    case FeatureKind::Mfcc: return "mfcc";
    case FeatureKind::Tempogram: return "tempogram";
    case FeatureKind::ChromaStft: return "chroma-stft";
    case FeatureKind::ChromaCqt: return "chroma-cqt";
    case FeatureKind::ChromaCens: return "chroma-cens";
  }
  return "?";
}

std::string_view display_name(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::Mel: return "Mel-scaled spectrograms";
    case FeatureKind::Mfcc: return "MFCCs";
    case FeatureKind::Tempogram: return "Cyclic tempograms";
    case FeatureKind::ChromaStft: return "STFT chromagrams";
    case FeatureKind::ChromaCqt: return "CQT chromagrams";
    case FeatureKind::ChromaCens: return "CENS chromagrams";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view text) noexcept {
  for (FeatureKind k : kAllFeatureKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

void check_feature(const FeatureMatrix& f) {
  if (f.rows() == 0 || f.cols() == 0) fail(ErrorKind::Shape, "feature matrix has an empty dimension");
  for (double v : f.values.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFinite, std::string(to_string(f.kind)) + " feature contains NaN/Inf");
  }
}

FeatureMatrix extract_feature(const AudioClip& clip, FeatureKind kind, const FeatureConfig& config) {
  const AudioClip canonical = canonicalize(clip, config.sample_rate_hz);
  MelParams mel;
  mel.stft.n_fft = config.n_fft;
  mel.stft.hop = config.hop;
  mel.n_mels = config.n_mels;

  CqtParams cq;
  cq.fmin_hz = config.cqt_fmin_hz;
  cq.n_bins = config.cqt_bins;
  cq.bins_per_octave = config.cqt_bins_per_octave;
  cq.hop = config.hop;

  FeatureMatrix out;
  switch (kind) {
    case FeatureKind::Mel:
      out = mel_spectrogram(canonical, mel);
      break;
    case FeatureKind::Mfcc:
      out = mfcc(canonical, config.n_mfcc, mel);
      break;
    case FeatureKind::Tempogram: {
      CyclicTempogramParams tp;
      tp.win_len = config.tempogram_win_len;
      tp.ref_tempo_bpm = config.tempogram_ref_bpm;
      tp.n_tempo_bins = config.tempogram_bins;
      out = cyclic_tempogram(canonical, tp, mel);
      break;
    }
    case FeatureKind::ChromaStft:
      out = chroma_stft(canonical, mel.stft);
      break;
    case FeatureKind::ChromaCqt:
      out = chroma_cqt(canonical, cq);
      break;
    case FeatureKind::ChromaCens:
      out = chroma_cens(canonical, config.cens_smooth_len, config.cens_downsample, cq);
      break;
  }
  // Feature images are float32 on disk and in the network; rounding here
  // keeps in-memory and reloaded features identical.
  for (double& v : out.values.values()) v = static_cast<double>(static_cast<float>(v));
  check_feature(out);
  return out;
}

}  // namespace sonoforge
