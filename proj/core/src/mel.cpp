#include "sonoforge/mel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

constexpr double kBreakHz = 1000.0;
constexpr double kBreakMel = 15.0;        // 3 * 1000 / 200
constexpr double kMelsPerLogStep = 27.0;  // mel gained per factor kLogStep
const double kLogStep = std::log(6.4);

}  // namespace

double hz_to_mel(double hz) {
  if (hz < 0.0 || std::isnan(hz)) fail(ErrorKind::Domain, "negative frequency");
  if (hz <= kBreakHz) return 3.0 * hz / 200.0;
  return kBreakMel + kMelsPerLogStep * std::log(hz / kBreakHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < 0.0 || std::isnan(mel)) fail(ErrorKind::Domain, "negative mel value");
  if (mel <= kBreakMel) return 200.0 * mel / 3.0;
  return kBreakHz * std::exp((mel - kBreakMel) * kLogStep / kMelsPerLogStep);
}

std::vector<double> MelFilterBank::peak_frequencies_hz() const {
  if (breakpoints_hz.size() < 2) return {};
  return {breakpoints_hz.begin() + 1, breakpoints_hz.end() - 1};
}

MelFilterBank build_mel_filterbank(int sample_rate_hz, std::size_t n_fft, int n_mels, double fmin_hz,
                                   double fmax_hz) {
  if (sample_rate_hz <= 0) fail(ErrorKind::Range, "sample rate must be positive");
  if (n_mels < 1) fail(ErrorKind::Range, "n_mels must be >= 1");
  if (n_fft < 2) fail(ErrorKind::Range, "n_fft must be >= 2");
  if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= sample_rate_hz / 2.0)) {
    fail(ErrorKind::Range, "need 0 <= fmin < fmax <= sr/2");
  }

  MelFilterBank bank;
  bank.sample_rate_hz = sample_rate_hz;
  bank.n_fft = n_fft;
  bank.fmin_hz = fmin_hz;
  bank.fmax_hz = fmax_hz;

  const double mel_lo = hz_to_mel(fmin_hz);
  const double mel_hi = hz_to_mel(fmax_hz);
  const auto n_points = static_cast<std::size_t>(n_mels) + 2;
  bank.breakpoints_hz.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double m = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
    bank.breakpoints_hz[i] = mel_to_hz(m);
  }

  const std::size_t n_bins = n_fft / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(n_fft);
  bank.weights = RealMatrix(static_cast<std::size_t>(n_mels), n_bins);
  for (std::size_t m = 0; m < static_cast<std::size_t>(n_mels); ++m) {
    const double lo = bank.breakpoints_hz[m];
    const double mid = bank.breakpoints_hz[m + 1];
    const double hi = bank.breakpoints_hz[m + 2];
    double area = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * bin_hz;
      const double rising = (f - lo) / (mid - lo);
      const double falling = (hi - f) / (hi - mid);
      const double w = std::max(0.0, std::min(rising, falling));
      bank.weights(m, b) = w;
      area += w * bin_hz;
    }
    if (area <= 0.0) {
      fail(ErrorKind::DegenerateFilterbank,
           "mel filter " + std::to_string(m) + " covers no FFT bin; reduce n_mels or raise n_fft");
    }
    for (double& w : bank.weights.row(m)) w /= area;
  }
  return bank;
}

RealMatrix mel_power(std::span<const double> samples, int sample_rate_hz, const MelParams& params) {
  const double fmax = params.fmax_hz < 0.0 ? sample_rate_hz / 2.0 : params.fmax_hz;
  const MelFilterBank bank =
      build_mel_filterbank(sample_rate_hz, params.stft.n_fft, params.n_mels, params.fmin_hz, fmax);
  const Spectrogram power = power_spectrogram(stft(samples, params.stft));

  const std::size_t n_bins = power.values.rows();
  const std::size_t n_frames = power.values.cols();
  RealMatrix out(bank.n_mels(), n_frames);
  for (std::size_t m = 0; m < bank.n_mels(); ++m) {
    const auto w = bank.weights.row(m);
    // weights are sparse; skip the zero run on either side of the triangle
    std::size_t first = 0, last = n_bins;
    while (first < n_bins && w[first] == 0.0) ++first;
    while (last > first && w[last - 1] == 0.0) --last;
    auto out_row = out.row(m);
    for (std::size_t b = first; b < last; ++b) {
      const auto p = power.values.row(b);
      for (std::size_t j = 0; j < n_frames; ++j) out_row[j] += w[b] * p[j];
    }
  }
  return out;
}

FeatureMatrix mel_spectrogram(const AudioClip& clip, const MelParams& params) {
  FeatureMatrix f;
  f.kind = FeatureKind::Mel;
  f.params = {static_cast<std::uint32_t>(clip.sample_rate_hz), static_cast<std::uint32_t>(params.stft.n_fft),
              static_cast<std::uint32_t>(params.stft.hop)};
  f.values = mel_power(clip.samples, clip.sample_rate_hz, params);
  power_to_db_inplace(f.values);
  return f;
}

std::vector<double> dct_ii(std::span<const double> x, std::size_t n_out) {
  const std::size_t n = x.size();
  if (n == 0) fail(ErrorKind::Size, "empty input");
  if (n_out > n) fail(ErrorKind::Size, "n_out exceeds input length");
  std::vector<double> y(n_out, 0.0);
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) * static_cast<double>(k) / dn);
    }
    y[k] = acc * (k == 0 ? std::sqrt(1.0 / dn) : std::sqrt(2.0 / dn));
  }
  return y;
}

FeatureMatrix mfcc_from_mel_db(const FeatureMatrix& mel_db, int n_mfcc) {
  if (n_mfcc < 1) fail(ErrorKind::Size, "n_mfcc must be >= 1");
  if (static_cast<std::size_t>(n_mfcc) > mel_db.rows()) {
    fail(ErrorKind::Size, "n_mfcc " + std::to_string(n_mfcc) + " exceeds n_mels " + std::to_string(mel_db.rows()));
  }
  FeatureMatrix f;
  f.kind = FeatureKind::Mfcc;
  f.params = mel_db.params;
  f.values = RealMatrix(static_cast<std::size_t>(n_mfcc), mel_db.cols());
  for (std::size_t j = 0; j < mel_db.cols(); ++j) {
    const auto col = mel_db.values.column(j);
    const auto coeffs = dct_ii(col, static_cast<std::size_t>(n_mfcc));
    for (std::size_t k = 0; k < coeffs.size(); ++k) f.values(k, j) = coeffs[k];
  }
  return f;
}

FeatureMatrix mfcc(const AudioClip& clip, int n_mfcc, const MelParams& params) {
  if (n_mfcc > params.n_mels) fail(ErrorKind::Size, "n_mfcc exceeds n_mels");
  return mfcc_from_mel_db(mel_spectrogram(clip, params), n_mfcc);
}

}  // namespace sonoforge
