#include "sonoforge/chroma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

void max_normalize_frames(RealMatrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double peak = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) peak = std::max(peak, m(r, j));
    if (peak > 0.0) {
      for (std::size_t r = 0; r < m.rows(); ++r) m(r, j) /= peak;
    }
  }
}

FeatureParams cqt_feature_params(const AudioClip& clip, std::size_t hop) {
  // n_fft is meaningless for the time-domain CQT and is recorded as 0.
  return {static_cast<std::uint32_t>(clip.sample_rate_hz), 0, static_cast<std::uint32_t>(hop)};
}

}  // namespace

int pitch_class(double hz) {
  if (!(hz > 0.0)) fail(ErrorKind::Domain, "pitch class needs a positive frequency");
  const long semis = std::lround(12.0 * std::log2(hz / kC0Hz));
  return static_cast<int>(((semis % kPitchClasses) + kPitchClasses) % kPitchClasses);
}

FeatureMatrix chroma_stft(const AudioClip& clip, const StftParams& params) {
  const Spectrogram power = power_spectrogram(stft(clip.samples, params));
  const std::size_t n_bins = power.values.rows();
  const double bin_hz = static_cast<double>(clip.sample_rate_hz) / static_cast<double>(params.n_fft);

  FeatureMatrix f;
  f.kind = FeatureKind::ChromaStft;
  f.params = {static_cast<std::uint32_t>(clip.sample_rate_hz), static_cast<std::uint32_t>(params.n_fft),
              static_cast<std::uint32_t>(params.hop)};
  f.values = RealMatrix(kPitchClasses, power.values.cols());
  for (std::size_t b = 1; b < n_bins; ++b) {  // DC has no pitch
    const auto pc = static_cast<std::size_t>(pitch_class(static_cast<double>(b) * bin_hz));
    const auto src = power.values.row(b);
    auto dst = f.values.row(pc);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
  }
  max_normalize_frames(f.values);
  return f;
}

CqtKernelBank::CqtKernelBank(int sample_rate_hz, const CqtParams& params)
    : bins_per_octave_(params.bins_per_octave), fmin_hz_(params.fmin_hz) {
  if (sample_rate_hz <= 0) fail(ErrorKind::Range, "sample rate must be positive");
  if (params.n_bins < 1 || params.bins_per_octave < 1) fail(ErrorKind::Range, "need n_bins, bins_per_octave >= 1");
  if (!(params.fmin_hz > 0.0)) fail(ErrorKind::Range, "fmin must be positive");
  const double top = params.fmin_hz * std::exp2(static_cast<double>(params.n_bins) / params.bins_per_octave);
  if (top > sample_rate_hz / 2.0) {
    fail(ErrorKind::Range, "highest CQT bin edge " + std::to_string(top) + " Hz exceeds Nyquist");
  }
  q_ = 1.0 / (std::exp2(1.0 / params.bins_per_octave) - 1.0);
  center_freqs_hz_.resize(static_cast<std::size_t>(params.n_bins));
  atoms_.resize(center_freqs_hz_.size());
  for (std::size_t k = 0; k < center_freqs_hz_.size(); ++k) {
    const double fk = params.fmin_hz * std::exp2(static_cast<double>(k) / params.bins_per_octave);
    center_freqs_hz_[k] = fk;
    const auto len = static_cast<std::size_t>(std::ceil(q_ * sample_rate_hz / fk));
    const auto window = make_window({WindowKind::Hann, std::max<std::size_t>(len, 2)});
    double mass = 0.0;
    for (double w : window) mass += w;
    const auto mid = static_cast<double>(window.size() / 2);
    auto& atom = atoms_[k];
    atom.resize(window.size());
    for (std::size_t n = 0; n < window.size(); ++n) {
      const double phase = 2.0 * std::numbers::pi * fk * (static_cast<double>(n) - mid) / sample_rate_hz;
      atom[n] = std::polar(window[n] / mass, phase);
    }
  }
}

std::vector<double> CqtKernelBank::bandwidths_hz() const {
  std::vector<double> bw(center_freqs_hz_.size());
  for (std::size_t k = 0; k < bw.size(); ++k) bw[k] = center_freqs_hz_[k] / q_;
  return bw;
}

ComplexMatrix cqt(std::span<const double> samples, const CqtKernelBank& bank, std::size_t hop) {
  if (hop == 0) fail(ErrorKind::Range, "hop must be >= 1");
  if (samples.empty()) fail(ErrorKind::EmptyOutput, "empty signal");
  const std::size_t longest = bank.atoms().front().size();
  if (longest > samples.size()) {
    fail(ErrorKind::AtomLength, "lowest CQT atom spans " + std::to_string(longest) + " samples but the signal has " +
                                    std::to_string(samples.size()) + "; raise fmin");
  }
  const std::size_t n_frames = 1 + samples.size() / hop;
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  ComplexMatrix out(bank.n_bins(), n_frames);

  std::vector<double> re, im;
  for (std::size_t k = 0; k < bank.n_bins(); ++k) {
    const auto& atom = bank.atoms()[k];
    re.resize(atom.size());
    im.resize(atom.size());
    // conjugated atom, split for vectorization
    for (std::size_t i = 0; i < atom.size(); ++i) {
      re[i] = atom[i].real();
      im[i] = -atom[i].imag();
    }
    const auto half = static_cast<std::ptrdiff_t>(atom.size() / 2);
    for (std::size_t j = 0; j < n_frames; ++j) {
      const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(j * hop) - half;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -start);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(atom.size()), n - start);
      double acc_re = 0.0, acc_im = 0.0;
      for (std::ptrdiff_t i = lo; i < hi; ++i) {
        const double x = samples[static_cast<std::size_t>(start + i)];
        acc_re += x * re[static_cast<std::size_t>(i)];
        acc_im += x * im[static_cast<std::size_t>(i)];
      }
      out(k, j) = {acc_re, acc_im};
    }
  }
  return out;
}

ComplexMatrix cqt(std::span<const double> samples, int sample_rate_hz, const CqtParams& params) {
  return cqt(samples, CqtKernelBank(sample_rate_hz, params), params.hop);
}

RealMatrix fold_octaves(const ComplexMatrix& m, std::span<const double> center_freqs_hz) {
  if (center_freqs_hz.size() != m.rows()) fail(ErrorKind::Shape, "one center frequency per CQT row required");
  RealMatrix out(kPitchClasses, m.cols());
  for (std::size_t k = 0; k < m.rows(); ++k) {
    auto dst = out.row(static_cast<std::size_t>(pitch_class(center_freqs_hz[k])));
    for (std::size_t j = 0; j < m.cols(); ++j) dst[j] += std::abs(m(k, j));
  }
  return out;
}

FeatureMatrix chroma_cqt(const AudioClip& clip, const CqtParams& params) {
  const CqtKernelBank bank(clip.sample_rate_hz, params);
  FeatureMatrix f;
  f.kind = FeatureKind::ChromaCqt;
  f.params = cqt_feature_params(clip, params.hop);
  f.values = fold_octaves(cqt(clip.samples, bank, params.hop), bank.center_freqs_hz());
  max_normalize_frames(f.values);
  return f;
}

int cens_code(double v) noexcept {
  int code = 0;
  for (double t : kCensThresholds) code += v > t ? 1 : 0;
  return code;
}

RealMatrix cens(const RealMatrix& chroma, int smooth_len, int downsample) {
  if (chroma.rows() != kPitchClasses) {
    fail(ErrorKind::Shape, "CENS needs 12 chroma rows, got " + std::to_string(chroma.rows()));
  }
  if (smooth_len < 1 || downsample < 1) fail(ErrorKind::Range, "smooth_len and downsample must be >= 1");
  const std::size_t n_frames = chroma.cols();

  RealMatrix quant(kPitchClasses, n_frames);
  for (std::size_t j = 0; j < n_frames; ++j) {
    double l1 = 0.0;
    for (std::size_t r = 0; r < kPitchClasses; ++r) l1 += std::abs(chroma(r, j));
    if (l1 == 0.0) continue;
    for (std::size_t r = 0; r < kPitchClasses; ++r) quant(r, j) = cens_code(std::abs(chroma(r, j)) / l1);
  }

  // Symmetric Hann of length smooth_len + 2 with its zero end points dropped.
  const auto len = static_cast<std::size_t>(smooth_len);
  std::vector<double> kernel(len);
  double mass = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    kernel[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(len + 1));
    mass += kernel[i];
  }
  for (double& k : kernel) k /= mass;

  const auto half = static_cast<std::ptrdiff_t>(len / 2);
  const auto step = static_cast<std::size_t>(downsample);
  const std::size_t out_frames = (n_frames + step - 1) / step;
  RealMatrix out(kPitchClasses, out_frames);
  for (std::size_t r = 0; r < kPitchClasses; ++r) {
    const auto row = quant.row(r);
    for (std::size_t jo = 0; jo < out_frames; ++jo) {
      const auto center = static_cast<std::ptrdiff_t>(jo * step);
      double acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const std::ptrdiff_t src = center + static_cast<std::ptrdiff_t>(i) - half;
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(n_frames)) acc += kernel[i] * row[static_cast<std::size_t>(src)];
      }
      out(r, jo) = acc;
    }
  }
  for (std::size_t j = 0; j < out_frames; ++j) {
    double l2 = 0.0;
    for (std::size_t r = 0; r < kPitchClasses; ++r) l2 += out(r, j) * out(r, j);
    if (l2 == 0.0) continue;
    l2 = std::sqrt(l2);
    for (std::size_t r = 0; r < kPitchClasses; ++r) out(r, j) /= l2;
  }
  return out;
}

FeatureMatrix chroma_cens(const AudioClip& clip, int smooth_len, int downsample, const CqtParams& params) {
  const CqtKernelBank bank(clip.sample_rate_hz, params);
  const RealMatrix raw = fold_octaves(cqt(clip.samples, bank, params.hop), bank.center_freqs_hz());
  FeatureMatrix f;
  f.kind = FeatureKind::ChromaCens;
  f.params = cqt_feature_params(clip, params.hop * static_cast<std::size_t>(std::max(downsample, 1)));
  f.values = cens(raw, smooth_len, downsample);
  return f;
}

}  // namespace sonoforge
