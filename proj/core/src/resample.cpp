#include <cmath>
#include <numbers>
#include <numeric>

#include "sonoforge/audio_io.hpp"
#include "sonoforge/error.hpp"

namespace sonoforge {
namespace {

constexpr int kZeroCrossings = 24;      // sinc half-width, in output-band zero crossings
constexpr double kRolloff = 0.94;       // cutoff relative to the lower Nyquist
constexpr double kKaiserBeta = 8.6;
constexpr std::int64_t kMaxTablePhases = 4096;

double kaiser(double x, double half_width) {
  const double r = x / half_width;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

struct Kernel {
  double cutoff;      // cycles per input sample * 2 (1 == input Nyquist)
  double half_width;  // in input samples
  int taps_per_side;

  double operator()(double x) const { return cutoff * sinc(cutoff * x) * kaiser(x, half_width); }
};

}  // namespace

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  if (target_rate_hz <= 0) fail(ErrorKind::Range, "target rate must be positive");
  if (clip.sample_rate_hz <= 0) fail(ErrorKind::Range, "source rate must be positive");
  if (clip.sample_rate_hz == target_rate_hz) return clip;

  const std::int64_t g = std::gcd<std::int64_t>(clip.sample_rate_hz, target_rate_hz);
  const std::int64_t up = target_rate_hz / g;
  const std::int64_t down = clip.sample_rate_hz / g;
  const auto n_in = static_cast<std::int64_t>(clip.samples.size());
  const std::int64_t n_out = (2 * n_in * up + down) / (2 * down);

  Kernel k;
  k.cutoff = kRolloff * std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  k.half_width = kZeroCrossings / k.cutoff;
  k.taps_per_side = static_cast<int>(std::ceil(k.half_width));
  const int n_taps = 2 * k.taps_per_side;

  // Phase p corresponds to a fractional input offset p / up.
  std::vector<double> table;
  const bool tabulate = up <= kMaxTablePhases;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up * n_taps));
    for (std::int64_t p = 0; p < up; ++p) {
      const double frac = static_cast<double>(p) / static_cast<double>(up);
      for (int t = 0; t < n_taps; ++t) {
        table[static_cast<std::size_t>(p * n_taps + t)] = k((t - k.taps_per_side + 1) - frac);
      }
    }
  }

  AudioClip out = clip;
  out.sample_rate_hz = target_rate_hz;
  out.samples.assign(static_cast<std::size_t>(n_out), 0.0);
  std::vector<double> scratch(static_cast<std::size_t>(n_taps));
  for (std::int64_t i = 0; i < n_out; ++i) {
    const std::int64_t num = i * down;
    const std::int64_t base = num / up;
    const std::int64_t phase = num % up;
    const double* taps;
    if (tabulate) {
      taps = table.data() + phase * n_taps;
    } else {
      const double frac = static_cast<double>(phase) / static_cast<double>(up);
      for (int t = 0; t < n_taps; ++t) scratch[static_cast<std::size_t>(t)] = k((t - k.taps_per_side + 1) - frac);
      taps = scratch.data();
    }
    double acc = 0.0;
    const std::int64_t first = base - k.taps_per_side + 1;
    for (int t = 0; t < n_taps; ++t) {
      const std::int64_t j = first + t;
      if (j >= 0 && j < n_in) acc += taps[t] * clip.samples[static_cast<std::size_t>(j)];
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace sonoforge
