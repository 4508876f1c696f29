#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "sonoforge/chroma.hpp"
#include "sonoforge/error.hpp"
#include "test_support.hpp"

using namespace sonoforge;

namespace {

AudioClip tones(std::initializer_list<double> freqs, double amp = 0.3, std::size_t n = 110250) {
  AudioClip c;
  c.sample_rate_hz = 22050;
  c.samples.assign(n, 0.0);
  for (double f : freqs) {
    for (std::size_t i = 0; i < n; ++i) c.samples[i] += amp * std::sin(2.0 * M_PI * f * static_cast<double>(i) / 22050.0);
  }
  return c;
}

std::size_t column_argmax(const RealMatrix& m, std::size_t j) {
  std::size_t best = 0;
  for (std::size_t r = 1; r < m.rows(); ++r) {
    if (m(r, j) > m(best, j)) best = r;
  }
  return best;
}

// Interior frames: far enough from the edges that padding does not matter.
template <typename F>
void for_interior(std::size_t cols, F&& f) {
  for (std::size_t j = 8; j + 8 < cols; ++j) f(j);
}

}  // namespace

TEST(PitchClass, FormulaOracle) {
  EXPECT_EQ(static_cast<int>(std::lround(12.0 * std::log2(440.0 / 16.3516))) % 12, 9);
  EXPECT_EQ(pitch_class(440.0), 9);
  EXPECT_EQ(pitch_class(220.0), 9);
  EXPECT_EQ(pitch_class(261.626), 0);
  EXPECT_EQ(pitch_class(16.3516), 0);
  EXPECT_EQ(pitch_class(30.87), 11);
}

TEST(ChromaStft, A440IsPitchClassA) {
  const auto c = chroma_stft(tones({440.0}));
  ASSERT_EQ(c.rows(), 12u);
  ASSERT_EQ(c.cols(), 216u);
  for_interior(c.cols(), [&](std::size_t j) { EXPECT_EQ(column_argmax(c.values, j), 9u) << "frame " << j; });
}

TEST(ChromaStft, OctavePairSharesClass) {
  const auto c = chroma_stft(tones({220.0, 440.0}));
  for_interior(c.cols(), [&](std::size_t j) { EXPECT_EQ(column_argmax(c.values, j), 9u); });
}

TEST(ChromaStft, FramesAreMaxNormalizedAndSilenceIsZero) {
  const auto c = chroma_stft(tones({330.0}));
  for_interior(c.cols(), [&](std::size_t j) { EXPECT_NEAR(c.values(column_argmax(c.values, j), j), 1.0, 1e-12); });
  const auto z = chroma_stft(tones({}, 0.0));
  for (double v : z.values.values()) ASSERT_EQ(v, 0.0);
}

TEST(Cqt, QualityFactor) {
  const CqtKernelBank bank(22050, {});
  EXPECT_NEAR(bank.q_factor(), 1.0 / (std::pow(2.0, 1.0 / 12.0) - 1.0), 1e-12);
  EXPECT_NEAR(bank.q_factor(), 16.8172, 1e-4);
  EXPECT_EQ(bank.n_bins(), 84u);
  const auto& f = bank.center_freqs_hz();
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_NEAR(f[k], 32.7032 * std::pow(2.0, k / 12.0), 1e-9);
  const auto bw = bank.bandwidths_hz();
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_NEAR(f[k] / bw[k], bank.q_factor(), 1e-9);
}

TEST(Cqt, C4LandsInBin36) {
  EXPECT_EQ(std::lround(12.0 * std::log2(261.626 / 32.7032)), 36);
  const auto c = tones({261.626});
  const auto m = cqt(c.samples, 22050, {});
  ASSERT_EQ(m.rows(), 84u);
  ASSERT_EQ(m.cols(), 216u);
  RealMatrix mag(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) mag.values()[i] = std::abs(m.values()[i]);
  for_interior(m.cols(), [&](std::size_t j) { EXPECT_EQ(column_argmax(mag, j), 36u) << "frame " << j; });
}

TEST(Cqt, SilenceIsZeroAndNyquistIsChecked) {
  const std::vector<double> z(110250, 0.0);
  const auto silent = cqt(z, 22050, {});
  for (const auto& v : silent.values()) ASSERT_EQ(v, Complex(0, 0));
  CqtParams too_high;
  too_high.n_bins = 120;
  EXPECT_THROW(CqtKernelBank(22050, too_high), Error);
}

TEST(Cqt, AtomLongerThanSignalIsAnError) {
  const std::vector<double> x(1000, 0.1);
  try {
    cqt(x, 22050, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AtomLength);
  }
}

TEST(ChromaCqt, C4IsClassC) {
  const auto c = chroma_cqt(tones({261.626}));
  ASSERT_EQ(c.rows(), 12u);
  for_interior(c.cols(), [&](std::size_t j) { EXPECT_EQ(column_argmax(c.values, j), 0u); });
}

TEST(ChromaCqt, C2PlusC5FoldsToC) {
  const auto c = chroma_cqt(tones({65.4064, 523.251}));
  for_interior(c.cols(), [&](std::size_t j) { EXPECT_EQ(column_argmax(c.values, j), 0u); });
}

TEST(ChromaCqt, A440AndSilence) {
  const auto c = chroma_cqt(tones({440.0}));
  for_interior(c.cols(), [&](std::size_t j) { EXPECT_EQ(column_argmax(c.values, j), 9u); });
  const auto z = chroma_cqt(tones({}, 0.0));
  for (double v : z.values.values()) ASSERT_EQ(v, 0.0);
}

TEST(Cens, QuantizationCodes) {
  EXPECT_EQ(cens_code(0.0), 0);
  EXPECT_EQ(cens_code(0.05), 0);
  EXPECT_EQ(cens_code(0.06), 1);
  EXPECT_EQ(cens_code(0.15), 2);
  EXPECT_EQ(cens_code(0.3), 3);
  EXPECT_EQ(cens_code(0.5), 4);
}

TEST(Cens, HalfHalfFrameQuantizesToFours) {
  // With smoothing and downsampling disabled the code pattern survives up
  // to the final L2 normalization: (4, 4, 0...) / (4 sqrt 2).
  RealMatrix chroma(12, 1);
  chroma(0, 0) = 0.5;
  chroma(1, 0) = 0.5;
  const auto out = cens(chroma, 1, 1);
  ASSERT_EQ(out.cols(), 1u);
  EXPECT_NEAR(out(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(out(1, 0), 1.0 / std::sqrt(2.0), 1e-12);
  for (std::size_t r = 2; r < 12; ++r) EXPECT_EQ(out(r, 0), 0.0);

  // L1 normalization happens first, so scale does not matter.
  RealMatrix scaled(12, 1);
  scaled(0, 0) = 7.0;
  scaled(1, 0) = 7.0;
  EXPECT_EQ(cens(scaled, 1, 1), out);
}

TEST(Cens, ZeroFramesStayZeroAndOthersHaveUnitNorm) {
  RealMatrix chroma(12, 200);
  const auto noise = testing_support::random_signal(12 * 100, 4, 0.0, 1.0);
  for (std::size_t j = 0; j < 100; ++j) {
    for (std::size_t r = 0; r < 12; ++r) chroma(r, j) = noise[j * 12 + r];
  }
  const auto out = cens(chroma, 41, 1);
  ASSERT_EQ(out.cols(), 200u);
  for (std::size_t j = 0; j < out.cols(); ++j) {
    double ss = 0.0;
    for (std::size_t r = 0; r < 12; ++r) ss += out(r, j) * out(r, j);
    if (ss > 0.0) EXPECT_NEAR(std::sqrt(ss), 1.0, 1e-9) << "frame " << j;
  }
  // frames beyond the smoothing reach of the nonzero region are exactly zero
  for (std::size_t j = 100 + 21; j < 200; ++j) {
    for (std::size_t r = 0; r < 12; ++r) ASSERT_EQ(out(r, j), 0.0);
  }
}

TEST(Cens, DownsampleLengthAndShapeCheck) {
  RealMatrix chroma(12, 216, 0.1);
  EXPECT_EQ(cens(chroma, 41, 10).cols(), 22u);
  EXPECT_EQ(cens(chroma, 41, 1).cols(), 216u);
  try {
    cens(RealMatrix(11, 5, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
  }
}

TEST(ChromaCens, ClipShapeAndUnitFrames) {
  const auto c = chroma_cens(tones({261.626, 329.628, 391.995}));
  ASSERT_EQ(c.rows(), 12u);
  ASSERT_EQ(c.cols(), 216u);
  EXPECT_EQ(c.kind, FeatureKind::ChromaCens);
  for (std::size_t j = 0; j < c.cols(); ++j) {
    double ss = 0.0;
    for (std::size_t r = 0; r < 12; ++r) ss += c.values(r, j) * c.values(r, j);
    EXPECT_NEAR(std::sqrt(ss), 1.0, 1e-9);
  }
}
