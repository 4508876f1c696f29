#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sonoforge/matrix.hpp"

namespace sonoforge {

using Complex = std::complex<double>;

enum class WindowKind { Hann, Hamming, Rectangular };

struct WindowSpec {
  WindowKind kind = WindowKind::Hann;
  std::size_t length = 2048;
};

enum class SpectrumScale { Power, Decibel };

struct Spectrogram {
  RealMatrix values;  // [n_fft/2 + 1, n_frames]
  std::size_t n_fft = 0;
  std::size_t hop = 0;
  int sample_rate_hz = 0;
  SpectrumScale scale = SpectrumScale::Power;
};

struct StftParams {
  std::size_t n_fft = 2048;
  std::size_t hop = 512;
  WindowKind window = WindowKind::Hann;
};

inline constexpr double kDbFloor = 1e-10;
inline constexpr double kTopDb = 80.0;

bool is_power_of_two(std::size_t n) noexcept;

/// Splits a signal into (optionally reflect-padded) overlapping frames.
/// Result is [frame_len, n_frames]; column j starts at j * hop.
RealMatrix frame_signal(std::span<const double> samples, std::size_t frame_len, std::size_t hop,
                        bool center);

/// Number of frames frame_signal produces, without materializing them.
std::size_t frame_count(std::size_t n_samples, std::size_t frame_len, std::size_t hop, bool center);

/// Periodic Hann / Hamming windows (DFT-even convention).
std::vector<double> make_window(const WindowSpec& spec);

/// O(N^2) reference transform. Test oracle only.
std::vector<Complex> dft_naive(std::span<const Complex> x);

/// Precomputed radix-2 twiddles and bit-reversal table for one size.
/// Immutable after construction; share freely across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<Complex> data) const;

  /// Cached plan for size n. Plans are never evicted.
  static std::shared_ptr<const FftPlan> get(std::size_t n);

 private:
  std::size_t n_;
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> bitrev_;
};

/// Forward transform; size must be a power of two.
std::vector<Complex> fft(std::span<const Complex> x);

/// Complex STFT [n_fft/2 + 1, n_frames] with centered, reflect-padded frames.
ComplexMatrix stft(std::span<const double> samples, const StftParams& params);

Spectrogram power_spectrogram(const ComplexMatrix& stft_matrix);

/// 10*log10(max(P, eps) / ref), clamped below at max - top_db.
Spectrogram amplitude_to_db(const Spectrogram& power, double ref = 1.0, double top_db = kTopDb);
void power_to_db_inplace(RealMatrix& values, double ref = 1.0, double top_db = kTopDb);

}  // namespace sonoforge
