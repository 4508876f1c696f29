#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sonoforge/rhythm.hpp"
#include "sonoforge/synth.hpp"

using namespace sonoforge;

namespace {

constexpr double kFrameRate = 22050.0 / 512.0;

std::vector<std::size_t> local_peaks(const std::vector<double>& v, double rel_threshold) {
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > rel_threshold * top && v[i] >= v[i - 1] && v[i] > v[i + 1]) peaks.push_back(i);
  }
  return peaks;
}

std::size_t summed_argmax(const RealMatrix& m) {
  std::vector<double> sums(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double v : m.row(r)) sums[r] += v;
  }
  return static_cast<std::size_t>(std::max_element(sums.begin(), sums.end()) - sums.begin());
}

int circular_distance(int a, int b, int n) {
  const int d = std::abs(a - b) % n;
  return std::min(d, n - d);
}

AudioClip steady_tone(std::size_t n) {
  // 20 cycles per hop: every STFT frame sees the same waveform
  AudioClip c;
  c.sample_rate_hz = 22050;
  c.samples.resize(n);
  const double f = 20.0 * 22050.0 / 512.0;
  for (std::size_t i = 0; i < n; ++i) c.samples[i] = 0.5 * std::sin(2.0 * M_PI * f * static_cast<double>(i) / 22050.0);
  return c;
}

}  // namespace

TEST(Novelty, SilenceIsZero) {
  const auto nov = onset_novelty(click_train(120.0, 5.0, 22050, 10.0));
  ASSERT_EQ(nov.values.size(), 216u);
  for (double v : nov.values) EXPECT_EQ(v, 0.0);
  EXPECT_NEAR(nov.frame_rate_hz, kFrameRate, 1e-12);
}

TEST(Novelty, SteadyToneIsFlatRelativeToAnOnset) {
  const auto steady = onset_novelty(steady_tone(110250));
  auto step = steady_tone(110250);
  std::fill(step.samples.begin(), step.samples.begin() + 55125, 0.0);
  const auto onset = onset_novelty(step);
  const double peak = *std::max_element(onset.values.begin(), onset.values.end());
  ASSERT_GT(peak, 0.0);
  for (std::size_t j = 5; j + 5 < steady.values.size(); ++j) EXPECT_LT(steady.values[j], 1e-6 * peak) << "frame " << j;
}

TEST(Novelty, ClickTrainPeakSpacing) {
  const auto nov = onset_novelty(click_train(120.0, 5.0, 22050, 0.1));
  const auto peaks = local_peaks(nov.values, 0.5);
  ASSERT_GE(peaks.size(), 8u);
  const double expected = 0.5 * kFrameRate;
  EXPECT_NEAR(expected, 21.533, 1e-3);
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    EXPECT_NEAR(static_cast<double>(peaks[i] - peaks[i - 1]), expected, 1.0);
  }
}

TEST(Autocorrelation, ZeroNoveltyGivesZeroMatrix) {
  NoveltyCurve nov{std::vector<double>(300, 0.0), kFrameRate};
  const auto t = autocorrelation_tempogram(nov, 64);
  EXPECT_EQ(t.rows(), 64u);
  EXPECT_EQ(t.cols(), 300u);
  for (double v : t.values()) ASSERT_EQ(v, 0.0);
}

TEST(Autocorrelation, LagZeroIsOneAndPeriodIsFound) {
  NoveltyCurve nov{std::vector<double>(600, 0.0), kFrameRate};
  for (std::size_t i = 3; i < nov.values.size(); i += 20) nov.values[i] = 1.0;
  const auto t = autocorrelation_tempogram(nov, 128);
  for (std::size_t j = 0; j < t.cols(); ++j) {
    bool nonzero = false;
    for (std::size_t r = 0; r < t.rows(); ++r) nonzero = nonzero || t(r, j) != 0.0;
    if (nonzero) EXPECT_NEAR(t(0, j), 1.0, 1e-12);
  }
  for (std::size_t j = 100; j < 500; ++j) {
    std::size_t best = 1;
    for (std::size_t r = 2; r < t.rows(); ++r) {
      if (t(r, j) > t(best, j)) best = r;
    }
    EXPECT_NEAR(static_cast<double>(best), 20.0, 1.0) << "frame " << j;
  }
}

TEST(Autocorrelation, WindowLongerThanCurve) {
  NoveltyCurve nov{std::vector<double>(216, 0.0), kFrameRate};
  for (std::size_t i = 0; i < 216; i += 22) nov.values[i] = 1.0;
  const auto t = autocorrelation_tempogram(nov, 384);
  EXPECT_EQ(t.rows(), 384u);
  EXPECT_EQ(t.cols(), 216u);
  for (double v : t.values()) ASSERT_TRUE(std::isfinite(v));
}

TEST(CyclicTempogram, BinArithmetic) {
  // log2(120 / 60) mod 1 == 0: 120 BPM shares the reference bin
  EXPECT_EQ(cyclic_tempo_bin(60.0, 60.0, 64), 0);
  EXPECT_EQ(cyclic_tempo_bin(120.0, 60.0, 64), 0);
  EXPECT_EQ(cyclic_tempo_bin(240.0, 60.0, 64), 0);
  EXPECT_EQ(cyclic_tempo_bin(60.0 * std::sqrt(2.0), 60.0, 64), 32);
  EXPECT_EQ(cyclic_tempo_bin(90.0, 60.0, 64), static_cast<int>(std::lround(64.0 * std::log2(1.5))));
}

TEST(CyclicTempogram, ShapeAndSilence) {
  const auto t = cyclic_tempogram(click_train(60.0, 5.0, 22050, 10.0));
  EXPECT_EQ(t.rows(), 64u);
  EXPECT_EQ(t.cols(), 216u);
  EXPECT_EQ(t.kind, FeatureKind::Tempogram);
  for (double v : t.values.values()) ASSERT_EQ(v, 0.0);
}

TEST(CyclicTempogram, ClickTrainAt120LandsOnItsBin) {
  const auto t = cyclic_tempogram(click_train(120.0, 5.0, 22050, 0.1));
  const int expected = cyclic_tempo_bin(120.0, 60.0, 64);
  EXPECT_LE(circular_distance(static_cast<int>(summed_argmax(t.values)), expected, 64), 1);
}

TEST(CyclicTempogram, OctaveEquivalence) {
  const auto t60 = cyclic_tempogram(click_train(60.0, 5.0, 22050, 0.1));
  const auto t120 = cyclic_tempogram(click_train(120.0, 5.0, 22050, 0.1));
  EXPECT_LE(circular_distance(static_cast<int>(summed_argmax(t60.values)), static_cast<int>(summed_argmax(t120.values)), 64),
            1);
}

TEST(CyclicTempogram, NonOctaveTempoSeparates) {
  const auto t90 = cyclic_tempogram(click_train(90.0, 5.0, 22050, 0.1));
  const int expected = cyclic_tempo_bin(90.0, 60.0, 64);
  EXPECT_LE(circular_distance(static_cast<int>(summed_argmax(t90.values)), expected, 64), 1);
}
