#include "sonoforge/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// numpy-style "reflect" index (edge sample not repeated).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t frame_count(std::size_t n_samples, std::size_t frame_len, std::size_t hop, bool center) {
  if (hop == 0) fail(ErrorKind::Range, "hop must be >= 1");
  if (frame_len == 0) fail(ErrorKind::Range, "frame length must be >= 1");
  const std::size_t padded = n_samples + (center ? 2 * (frame_len / 2) : 0);
  if (n_samples == 0 || frame_len > padded) {
    fail(ErrorKind::EmptyOutput, "frame length " + std::to_string(frame_len) +
                                     " exceeds padded signal length " + std::to_string(padded));
  }
  return 1 + (padded - frame_len) / hop;
}

RealMatrix frame_signal(std::span<const double> samples, std::size_t frame_len, std::size_t hop,
                        bool center) {
  const std::size_t n_frames = frame_count(samples.size(), frame_len, hop, center);
  const auto pad = static_cast<std::ptrdiff_t>(center ? frame_len / 2 : 0);
  RealMatrix frames(frame_len, n_frames);
  for (std::size_t j = 0; j < n_frames; ++j) {
    const auto start = static_cast<std::ptrdiff_t>(j * hop) - pad;
    for (std::size_t t = 0; t < frame_len; ++t) {
      frames(t, j) = samples[reflect_index(start + static_cast<std::ptrdiff_t>(t), samples.size())];
    }
  }
  return frames;
}

std::vector<double> make_window(const WindowSpec& spec) {
  const std::size_t n = spec.length;
  if (n == 0) fail(ErrorKind::Range, "window length must be positive");
  if (spec.kind != WindowKind::Rectangular && n < 2) {
    fail(ErrorKind::Range, "tapered windows need length >= 2");
  }
  std::vector<double> w(n, 1.0);
  for (std::size_t i = 0; i < n && spec.kind != WindowKind::Rectangular; ++i) {
    const double c = std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    w[i] = spec.kind == WindowKind::Hann ? 0.5 - 0.5 * c : 0.54 - 0.46 * c;
  }
  return w;
}

std::vector<Complex> dft_naive(std::span<const Complex> x) {
  const std::size_t n = x.size();
  if (n == 0) fail(ErrorKind::Size, "empty input");
  // every angle 2 pi k t / n is one of the n roots of unity
  std::vector<double> re(n), im(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double angle = -kTwoPi * static_cast<double>(m) / static_cast<double>(n);
    re[m] = std::cos(angle);
    im[m] = std::sin(angle);
  }
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc_re = 0.0, acc_im = 0.0;
    std::size_t m = 0;
    for (std::size_t t = 0; t < n; ++t) {
      acc_re += x[t].real() * re[m] - x[t].imag() * im[m];
      acc_im += x[t].real() * im[m] + x[t].imag() * re[m];
      m += k;
      if (m >= n) m -= n;
    }
    out[k] = {acc_re, acc_im};
  }
  return out;
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_power_of_two(n)) fail(ErrorKind::Size, "FFT length " + std::to_string(n) + " is not a power of two");
  twiddles_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    twiddles_[k] = std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }
  bitrev_.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
    bitrev_[i] = r;
  }
}

void FftPlan::forward(std::span<Complex> data) const {
  if (data.size() != n_) fail(ErrorKind::Size, "plan/data size mismatch");
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = twiddles_[k * stride] * data[start + k + half];
        data[start + k + half] = data[start + k] - t;
        data[start + k] += t;
      }
    }
  }
}

std::shared_ptr<const FftPlan> FftPlan::get(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const FftPlan>(n);
  return slot;
}

std::vector<Complex> fft(std::span<const Complex> x) {
  if (!is_power_of_two(x.size())) {
    fail(ErrorKind::Size, "FFT length " + std::to_string(x.size()) + " is not a power of two");
  }
  std::vector<Complex> out(x.begin(), x.end());
  FftPlan::get(x.size())->forward(out);
  return out;
}

ComplexMatrix stft(std::span<const double> samples, const StftParams& params) {
  const auto plan = FftPlan::get(params.n_fft);
  const auto window = make_window({params.window, params.n_fft});
  const RealMatrix frames = frame_signal(samples, params.n_fft, params.hop, true);
  const std::size_t n_bins = params.n_fft / 2 + 1;
  ComplexMatrix out(n_bins, frames.cols());
  std::vector<Complex> buf(params.n_fft);
  for (std::size_t j = 0; j < frames.cols(); ++j) {
    for (std::size_t t = 0; t < params.n_fft; ++t) buf[t] = frames(t, j) * window[t];
    plan->forward(buf);
    for (std::size_t b = 0; b < n_bins; ++b) out(b, j) = buf[b];
  }
  return out;
}

Spectrogram power_spectrogram(const ComplexMatrix& s) {
  Spectrogram out;
  out.values = RealMatrix(s.rows(), s.cols());
  for (std::size_t i = 0; i < s.size(); ++i) out.values.data()[i] = std::norm(s.data()[i]);
  out.n_fft = s.rows() > 0 ? 2 * (s.rows() - 1) : 0;
  out.scale = SpectrumScale::Power;
  return out;
}

void power_to_db_inplace(RealMatrix& values, double ref, double top_db) {
  if (!(ref > 0.0)) fail(ErrorKind::Range, "ref must be positive");
  if (!(top_db > 0.0)) fail(ErrorKind::Range, "top_db must be positive");
  double peak = -std::numeric_limits<double>::infinity();
  for (double& v : values.values()) {
    v = 10.0 * std::log10(std::max(v, kDbFloor) / ref);
    peak = std::max(peak, v);
  }
  const double floor = peak - top_db;
  for (double& v : values.values()) v = std::max(v, floor);
}

Spectrogram amplitude_to_db(const Spectrogram& power, double ref, double top_db) {
  if (power.scale != SpectrumScale::Power) fail(ErrorKind::Validation, "input is already in dB");
  Spectrogram out = power;
  power_to_db_inplace(out.values, ref, top_db);
  out.scale = SpectrumScale::Decibel;
  return out;
}

}  // namespace sonoforge
