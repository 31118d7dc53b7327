// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "rtfvae/signal.hpp"

namespace rtfvae {
namespace {

constexpr double kPi = std::numbers::pi;

TimeSignal noise(Index n, std::uint64_t seed) {
  Rng rng(seed);
  return TimeSignal{gaussian_vector(n, rng), kSampleRate};
}

// Naive one-sided DFT of one real frame, bins 0..n/2.
CVec naive_dft(const Vec& frame) {
  const Index n = frame.size();
  CVec out(n / 2 + 1);
  for (Index k = 0; k <= n / 2; ++k) {
    Complex acc{};
    for (Index i = 0; i < n; ++i)
      acc += frame[i] * std::polar(1.0, -2.0 * kPi * k * i / n);
    out[k] = acc;
  }
  return out;
}

TEST(Stft, ShapeFollowsFrameCount) {
  const auto x = noise(16000, 1);
  const auto s = stft(x, 256, 128);
  EXPECT_EQ(s.bins(), 128);
  EXPECT_EQ(s.frames(), (16000 - 256) / 128 + 1);
}

TEST(Stft, ZeroSignalGivesZeroFrames) {
  const TimeSignal x{Vec::Zero(16000), kSampleRate};
  EXPECT_EQ(stft(x).data.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Stft, MatchesDirectDftOfWindowedFrame) {
  const auto x = noise(1024, 2);
  const auto s = stft(x);
  const Vec w = make_window(Window::SqrtHann, 256);
  for (Index l : {Index{0}, Index{3}, s.frames() - 1}) {
    const CVec ref = naive_dft(w.cwiseProduct(x.samples.segment(l * 128, 256)));
    EXPECT_NEAR(s.dc[l], ref[0].real(), 1e-9);
    for (Index k = 1; k <= 128; ++k)
      EXPECT_LT(std::abs(s.data(k - 1, l) - ref[k]), 1e-9);
  }
}

TEST(Stft, SinusoidAtBinEightConcentratesEnergy) {
  TimeSignal x{Vec(4096), kSampleRate};
  for (Index i = 0; i < x.size(); ++i)
    x.samples[i] = std::cos(2.0 * kPi * 8.0 * i / 256.0 + 0.3);
  const auto s = stft(x, StftConfig{256, 128, Window::Rectangular});
  for (Index l = 0; l < s.frames(); ++l) {
    const double total = s.data.col(l).squaredNorm();
    EXPECT_GE(std::norm(s.data(7, l)) / total, 0.99);
  }
}

TEST(Stft, ParsevalOnRectangularFrame) {
  const auto x = noise(256, 3);
  const auto s = stft(x, StftConfig{256, 256, Window::Rectangular});
  double spec = s.dc[0] * s.dc[0] + std::norm(s.data(127, 0));
  for (Index k = 0; k < 127; ++k) spec += 2.0 * std::norm(s.data(k, 0));
  EXPECT_NEAR(spec / 256.0, x.energy(), 1e-9 * x.energy());
}

TEST(Stft, IsLinear) {
  const auto x = noise(4000, 4);
  const auto y = noise(4000, 5);
  const double a = 0.7, b = -1.9;
  const TimeSignal z{a * x.samples + b * y.samples, kSampleRate};
  const CMat lhs = stft(z).data;
  const CMat rhs = a * stft(x).data + b * stft(y).data;
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Stft, PerfectReconstructionOnInterior) {
  const auto x = noise(16000, 6);
  const auto s = stft(x);
  const auto y = istft(s);
  const auto [first, last] = fully_overlapped_range(s.frames(), StftConfig{});
  ASSERT_LT(first, last);
  const double err =
      (y.samples.segment(first, last - first) -
       x.samples.segment(first, last - first))
          .cwiseAbs()
          .maxCoeff();
  EXPECT_LE(err, 1e-10);
}

TEST(Stft, Errors) {
  EXPECT_THROW(stft(noise(100, 1)), Error);
  EXPECT_THROW(stft(noise(1000, 1), 255, 128), Error);
  EXPECT_THROW(stft(noise(1000, 1), 256, 0), Error);
  EXPECT_THROW(stft(noise(1000, 1), 256, 300), Error);
  try {
    stft(noise(100, 1));
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("insufficient samples"),
              std::string::npos);
  }
  TimeSignal bad = noise(1000, 1);
  bad.samples[10] = std::nan("");
  EXPECT_THROW(stft(bad), Error);
}

TEST(Istft, ZeroFramesGiveZeroSignal) {
  SpectralFrames f{CMat::Zero(128, 5), Vec::Zero(5)};
  EXPECT_EQ(istft(f).samples.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(istft(f).size(), 4 * 128 + 256);
}

TEST(Istft, SingleBinIsWindowedSinusoid) {
  SpectralFrames f{CMat::Zero(128, 1), Vec::Zero(1)};
  const Complex c(0.8, -0.3);
  f.data(9, 0) = c;  // bin 10
  const auto y = istft(f);
  const Vec w = make_window(Window::SqrtHann, 256);
  for (Index i = 0; i < 256; ++i) {
    // Inverse DFT of the Hermitian pair, then synthesis window over w^2.
    const double frame =
        2.0 / 256.0 * (c * std::polar(1.0, 2.0 * kPi * 10 * i / 256.0)).real();
    const double expected = w[i] * w[i] > 1e-12 ? frame / w[i] : 0.0;
    EXPECT_NEAR(y.samples[i], expected, 1e-12);
  }
}

TEST(Istft, InconsistentDimensions) {
  SpectralFrames f{CMat::Zero(100, 5), Vec()};
  EXPECT_THROW(istft(f), Error);
  SpectralFrames g{CMat::Zero(128, 5), Vec::Zero(3)};
  EXPECT_THROW(istft(g), Error);
}

SpectralFrames random_frames(Index k, Index l, std::uint64_t seed) {
  Rng rng(seed);
  SpectralFrames f;
  f.data = gaussian_matrix(k, l, rng).cast<Complex>() +
           Complex(0, 1) * gaussian_matrix(k, l, rng).cast<Complex>();
  return f;
}

TEST(InstantaneousPsd, IdenticalChannelsGiveRealCross) {
  const auto x = random_frames(16, 10, 7);
  const auto p = instantaneous_psd(x, x);
  EXPECT_LT((p.cross - p.auto_psd.cast<Complex>()).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_GE(p.auto_psd.minCoeff(), 0.0);
}

TEST(InstantaneousPsd, OneHot) {
  SpectralFrames x{CMat::Zero(4, 3), Vec()};
  x.data(2, 1) = std::polar(1.0, 0.7);
  const auto p = instantaneous_psd(x, x);
  EXPECT_NEAR(p.auto_psd.sum(), 1.0, 1e-15);
  EXPECT_NEAR(p.auto_psd(2, 1), 1.0, 1e-15);
}

TEST(InstantaneousPsd, CrossIsConjugateSymmetric) {
  const auto a = random_frames(16, 10, 8);
  const auto b = random_frames(16, 10, 9);
  const auto ab = instantaneous_psd(a, b);
  const auto ba = instantaneous_psd(b, a);
  for (Index k = 0; k < 16; ++k)
    for (Index l = 0; l < 10; ++l) {
      EXPECT_EQ(ab.cross(k, l), std::conj(ba.cross(k, l)));
      EXPECT_EQ(ab.cross(k, l), b.data(k, l) * std::conj(a.data(k, l)));
    }
}

TEST(InstantaneousPsd, AutoInvariantToPhaseRotation) {
  const auto a = random_frames(16, 10, 10);
  SpectralFrames r = a;
  r.data *= std::polar(1.0, 1.234);
  const auto p = instantaneous_psd(a, a);
  const auto q = instantaneous_psd(r, r);
  EXPECT_LT((p.auto_psd - q.auto_psd).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InstantaneousPsd, ShapeMismatch) {
  EXPECT_THROW(instantaneous_psd(random_frames(4, 3, 1), random_frames(4, 2, 1)),
               Error);
}

TEST(Convolution, MatchesDirectSum) {
  const auto x = noise(9000, 11);
  const auto h = noise(300, 12);
  const Vec y = convolve_same_length(x.samples, h.samples);
  for (Index i : {Index{0}, Index{5}, Index{299}, Index{4097}, Index{8999}}) {
    double acc = 0.0;
    for (Index k = 0; k <= std::min<Index>(i, 299); ++k)
      acc += h.samples[k] * x.samples[i - k];
    EXPECT_NEAR(y[i], acc, 1e-10);
  }
}

TEST(SignalIo, RoundTrips) {
  const auto dir = std::filesystem::temp_directory_path() / "rtfvae_io_test";
  std::filesystem::create_directories(dir);
  TimeSignal x = noise(500, 13);
  x.samples *= 0.2;
  write_f64_signal(dir / "x.f64", x);
  EXPECT_EQ(read_f64_signal(dir / "x.f64").samples, x.samples);
  write_wav(dir / "x.wav", x);
  const auto y = read_wav(dir / "x.wav");
  EXPECT_EQ(y.size(), x.size());
  EXPECT_EQ(y.sample_rate, kSampleRate);
  EXPECT_LT((y.samples - x.samples.cwiseMax(-1.0).cwiseMin(1.0))
                .cwiseAbs()
                .maxCoeff(),
            1.0 / 32767.0);
}

}  // namespace
}  // namespace rtfvae
