#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sonoforge/dsp.hpp"
#include "sonoforge/error.hpp"
#include "test_support.hpp"

using namespace sonoforge;

namespace {

std::vector<Complex> random_complex(std::size_t n, std::uint64_t seed) {
  const auto re = testing_support::random_signal(n, seed);
  const auto im = testing_support::random_signal(n, seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
  return x;
}

}  // namespace

TEST(Frames, CanonicalClipGives216Frames) {
  EXPECT_EQ(1 + (110250 + 2048 - 2048) / 512, 216);
  EXPECT_EQ(frame_count(110250, 2048, 512, true), 216u);
  const std::vector<double> x(110250, 0.25);
  const auto frames = frame_signal(x, 2048, 512, true);
  EXPECT_EQ(frames.rows(), 2048u);
  EXPECT_EQ(frames.cols(), 216u);
}

TEST(Frames, SingleUncenteredFrameEqualsSignal) {
  const auto x = testing_support::random_signal(64, 3);
  const auto frames = frame_signal(x, 64, 17, false);
  ASSERT_EQ(frames.cols(), 1u);
  EXPECT_EQ(frames.column(0), x);
}

TEST(Frames, ConstantSignalGivesIdenticalFrames) {
  const std::vector<double> x(5000, -0.3);
  const auto frames = frame_signal(x, 256, 100, true);
  for (std::size_t j = 1; j < frames.cols(); ++j) EXPECT_EQ(frames.column(j), frames.column(0));
}

TEST(Frames, ReflectPaddingMirrorsWithoutEdgeRepeat) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8};
  const auto frames = frame_signal(x, 4, 2, true);
  // padded: 3 2 | 1 2 3 4 5 6 7 8 | 7 6
  EXPECT_EQ(frames.column(0), (std::vector<double>{3, 2, 1, 2}));
  EXPECT_EQ(frames.column(frames.cols() - 1), (std::vector<double>{7, 8, 7, 6}));
}

TEST(Frames, TooShortUncenteredSignalIsAnError) {
  const std::vector<double> x(10, 0.0);
  EXPECT_THROW(frame_signal(x, 16, 4, false), Error);
}

TEST(Window, RectangularIsAllOnes) {
  EXPECT_EQ(make_window({WindowKind::Rectangular, 8}), std::vector<double>(8, 1.0));
}

TEST(Window, PeriodicHannOfLengthFour) {
  const auto w = make_window({WindowKind::Hann, 4});
  ASSERT_EQ(w.size(), 4u);
  EXPECT_NEAR(w[0], 0.0, 1e-15);
  EXPECT_NEAR(w[1], 0.5, 1e-15);
  EXPECT_NEAR(w[2], 1.0, 1e-15);
  EXPECT_NEAR(w[3], 0.5, 1e-15);
}

TEST(Window, HannPeaksAtCentre) {
  for (std::size_t n : {8u, 31u, 2048u}) {
    const auto w = make_window({WindowKind::Hann, n});
    const auto peak = std::max_element(w.begin(), w.end()) - w.begin();
    EXPECT_EQ(static_cast<std::size_t>(peak), n / 2);
    if (n % 2 == 0) EXPECT_NEAR(w[n / 2], 1.0, 1e-15);
  }
}

TEST(Dft, ImpulseAndConstant) {
  const std::vector<Complex> impulse{1, 0, 0, 0};
  for (const auto& v : dft_naive(impulse)) EXPECT_NEAR(std::abs(v - Complex(1, 0)), 0.0, 1e-15);
  const std::vector<Complex> ones{1, 1, 1, 1};
  const auto y = dft_naive(ones);
  EXPECT_NEAR(std::abs(y[0] - Complex(4, 0)), 0.0, 1e-15);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(y[k]), 0.0, 1e-15);
}

TEST(Dft, ComplexExponentialLandsInOneBin) {
  std::vector<Complex> x(8);
  for (int n = 0; n < 8; ++n) x[n] = std::polar(1.0, 2.0 * M_PI * 3.0 * n / 8.0);
  const auto y = dft_naive(x);
  for (int k = 0; k < 8; ++k) EXPECT_NEAR(std::abs(y[k] - Complex(k == 3 ? 8.0 : 0.0, 0.0)), 0.0, 1e-12);
}

TEST(Fft, MatchesNaiveDftAt1024) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = random_complex(1024, seed);
    const auto fast = fft(x);
    const auto slow = dft_naive(x);
    double worst = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(fast[k] - slow[k]) / (1.0 + std::abs(slow[k])));
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(Fft, ZerosAndParseval) {
  const std::vector<Complex> zeros(256);
  for (const auto& v : fft(zeros)) EXPECT_EQ(v, Complex(0, 0));
  const auto x = random_complex(4096, 11);
  const auto y = fft(x);
  double ex = 0.0, ey = 0.0;
  for (const auto& v : x) ex += std::norm(v);
  for (const auto& v : y) ey += std::norm(v);
  EXPECT_NEAR(ey / 4096.0, ex, 1e-9 * ex);
}

TEST(Fft, SmallSizes) {
  for (std::size_t n : {1u, 2u, 4u, 8u}) {
    const auto x = random_complex(n, n);
    const auto fast = fft(x);
    const auto slow = dft_naive(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(std::abs(fast[k] - slow[k]), 0.0, 1e-12);
  }
}

TEST(Fft, RejectsNonPowerOfTwo) {
  const std::vector<Complex> x(12);
  try {
    fft(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Size);
  }
}

TEST(Stft, DcSignalWithRectangularWindowIsBinZeroOnly) {
  const std::vector<double> x(8192, 0.5);
  const auto s = stft(x, {1024, 256, WindowKind::Rectangular});
  for (std::size_t j = 0; j < s.cols(); ++j) {
    EXPECT_NEAR(std::abs(s(0, j)), 512.0, 1e-9);
    for (std::size_t k = 1; k < s.rows(); ++k) ASSERT_LT(std::abs(s(k, j)), 1e-9);
  }
}

TEST(Stft, BinCentredSineArgmaxAndNaiveAgreement) {
  const double sr = 22050.0, f = 32.0 * sr / 2048.0;
  std::vector<double> x(22050);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * M_PI * f * static_cast<double>(i) / sr);
  const auto s = stft(x, {});
  const auto frames = frame_signal(x, 2048, 512, true);
  const auto w = make_window({WindowKind::Hann, 2048});
  for (std::size_t j = 4; j + 4 < s.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.rows(); ++k) {
      if (std::abs(s(k, j)) > std::abs(s(best, j))) best = k;
    }
    EXPECT_EQ(best, 32u) << "frame " << j;
  }
  std::vector<Complex> frame(2048);
  const std::size_t j = s.cols() / 2;
  for (std::size_t i = 0; i < 2048; ++i) frame[i] = frames(i, j) * w[i];
  const auto ref = dft_naive(frame);
  for (std::size_t k = 0; k < s.rows(); ++k) EXPECT_NEAR(std::abs(s(k, j) - ref[k]), 0.0, 1e-8);
}

TEST(Stft, SilenceIsZero) {
  const std::vector<double> x(4096, 0.0);
  const auto s = stft(x, {});
  for (const auto& v : s.values()) ASSERT_EQ(v, Complex(0, 0));
}

TEST(Power, MagnitudeSquared) {
  ComplexMatrix m(2, 2);
  m(0, 0) = {3, 4};
  m(1, 1) = {-1, 2};
  const auto p = power_spectrogram(m);
  EXPECT_EQ(p.values(0, 0), 25.0);
  EXPECT_EQ(p.values(1, 1), 5.0);
  EXPECT_EQ(p.values(0, 1), 0.0);

  ComplexMatrix r(7, 9);
  const auto re = testing_support::random_signal(63, 1), im = testing_support::random_signal(63, 2);
  for (std::size_t i = 0; i < 63; ++i) r.values()[i] = {re[i], im[i]};
  const auto pr = power_spectrogram(r);
  for (std::size_t i = 0; i < 63; ++i) EXPECT_NEAR(pr.values.values()[i], re[i] * re[i] + im[i] * im[i], 1e-12);
}

TEST(Decibel, ReferenceDecadeAndFloor) {
  Spectrogram p;
  p.values = RealMatrix(1, 2);
  p.values(0, 0) = 2.0;
  p.values(0, 1) = 20.0;
  const auto db = amplitude_to_db(p, 2.0);
  EXPECT_NEAR(db.values(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(db.values(0, 1), 10.0, 1e-12);
  EXPECT_EQ(db.scale, SpectrumScale::Decibel);

  Spectrogram zero;
  zero.values = RealMatrix(3, 4);
  const auto zdb = amplitude_to_db(zero, 1.0, 80.0);
  for (double v : zdb.values.values()) EXPECT_NEAR(v, -100.0, 1e-12);
}

TEST(Decibel, TopDbClamp) {
  Spectrogram p;
  p.values = RealMatrix(1, 3);
  p.values(0, 0) = 1.0;
  p.values(0, 1) = 1e-9;
  p.values(0, 2) = 1e-3;
  const auto db = amplitude_to_db(p, 1.0, 80.0);
  EXPECT_NEAR(db.values(0, 1), -80.0, 1e-12);
  EXPECT_NEAR(db.values(0, 2), -30.0, 1e-12);
}

TEST(Decibel, RejectsAlreadyScaledInput) {
  Spectrogram p;
  p.values = RealMatrix(1, 1);
  p.scale = SpectrumScale::Decibel;
  EXPECT_THROW(amplitude_to_db(p), Error);
}
