// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include "rtfvae/enhance.hpp"
#include "rtfvae/train.hpp"

namespace rtfvae {
namespace {

constexpr Index kBins = 8;

VaeArchitecture small_arch() {
  VaeArchitecture a;
  a.dim = 2 * kBins;
  a.latent = 2;
  a.encoder_hidden = {12, 6};
  a.decoder_hidden = {6, 12};
  return a;
}

VaeParams<double> random_params(Rng& rng, double scale = 0.4) {
  auto p = make_vae(small_arch());
  unflatten(Vec(gaussian_vector(p.parameter_count(), rng) * scale), p);
  return p;
}

CMat complex_gaussian(Index k, Index l, Rng& rng) {
  return gaussian_matrix(k, l, rng).cast<Complex>() +
         Complex(0, 1) * gaussian_matrix(k, l, rng).cast<Complex>();
}

ObservationSet random_obs(Rng& rng, Index frames = 20) {
  return {{complex_gaussian(kBins, frames, rng), Vec()},
          {complex_gaussian(kBins, frames, rng), Vec()}};
}

// Decoder that ignores z and always outputs `h`.
VaeParams<double> constant_decoder(const Vec& h, const Vec& mean, Rng& rng) {
  auto p = random_params(rng);
  p.decoder = p.decoder.zeros_like();
  p.decoder.layers.back().bias = h - mean;
  return p;
}

TEST(LsCost, ZeroWhenDecoderMatchesExactRelation) {
  Rng rng(1);
  const CVec h = complex_gaussian(kBins, 1, rng).col(0);
  ObservationSet obs{{complex_gaussian(kBins, 30, rng), Vec()}, {}};
  obs.x2.data = h.asDiagonal() * obs.x1.data;
  const Vec mean = gaussian_vector(2 * kBins, rng);
  const auto p = constant_decoder(pack_rtf(h), mean, rng);
  const double scale = obs.x2.data.cwiseAbs2().sum();
  EXPECT_NEAR(ls_cost(Vec(Vec::Zero(2)), obs, p, mean), 0.0, 1e-12 * scale);
}

TEST(LsCost, SilentReferenceCostIsTargetEnergy) {
  Rng rng(2);
  ObservationSet obs = random_obs(rng);
  obs.x1.data.setZero();
  const auto p = random_params(rng);
  const Vec mean = Vec::Zero(2 * kBins);
  EXPECT_DOUBLE_EQ(ls_cost(Vec(Vec::Ones(2)), obs, p, mean),
                   obs.x2.data.cwiseAbs2().sum());
}

TEST(LsCost, MatchesDoubleLoop) {
  Rng rng(3);
  const ObservationSet obs = random_obs(rng);
  const auto p = random_params(rng);
  const Vec mean = gaussian_vector(2 * kBins, rng);
  const Vec z = gaussian_vector(2, rng);
  const CVec h = unpack_rtf(Vec(decode(p, Mat(z)).col(0) + mean));
  double ref = 0.0;
  for (Index k = 0; k < kBins; ++k)
    for (Index l = 0; l < obs.x1.frames(); ++l)
      ref += std::norm(obs.x2.data(k, l) - h[k] * obs.x1.data(k, l));
  EXPECT_NEAR(ls_cost(z, obs, p, mean), ref, 1e-10 * ref);
}

TEST(LsGradient, MatchesCentralDifferences) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(100 + s);
    const auto stats = ls_statistics(random_obs(rng));
    const auto p = random_params(rng);
    const Vec mean = gaussian_vector(2 * kBins, rng);
    Vec z = gaussian_vector(2, rng);
    const Vec g = ls_gradient(z, stats, p, mean);
    Vec num(2);
    for (Index i = 0; i < 2; ++i) {
      const double keep = z[i];
      z[i] = keep + 1e-5;
      const double up = ls_cost(z, stats, p, mean);
      z[i] = keep - 1e-5;
      const double down = ls_cost(z, stats, p, mean);
      z[i] = keep;
      num[i] = (up - down) / 2e-5;
    }
    worst = std::max(worst, (g - num).cwiseAbs().maxCoeff() /
                                std::max(g.cwiseAbs().maxCoeff(), 1e-8));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(LsEnhance, NoStepsEqualsDenoise) {
  Rng rng(4);
  const ObservationSet obs = random_obs(rng);
  const auto p = random_params(rng);
  const Vec mean = gaussian_vector(2 * kBins, rng);
  const Vec h = estimate_rtf(obs.x1, obs.x2);
  const Vec dn = denoise(p, h, mean);
  EXPECT_EQ(ls_enhance(p, h, obs, EnhanceConfig{0.0, 20}, mean).rtf, dn);
  const auto r = ls_enhance(p, h, obs, EnhanceConfig{2.0, 0}, mean);
  EXPECT_EQ(r.rtf, dn);
  EXPECT_EQ(r.cost.size(), 1u);
}

TEST(LsEnhance, OutputLiesOnDecoderRange) {
  Rng rng(5);
  const ObservationSet obs = random_obs(rng);
  const auto p = random_params(rng);
  const Vec mean = Vec::Zero(2 * kBins);
  const auto r =
      ls_enhance(p, estimate_rtf(obs.x1, obs.x2), obs, EnhanceConfig{}, mean);
  EXPECT_EQ(r.cost.size(), 21u);
  EXPECT_EQ(r.rtf, Vec(decode(p, Mat(r.z)).col(0)));
}

TEST(LsEnhance, InvariantToJointObservationScaling) {
  Rng rng(6);
  const ObservationSet obs = random_obs(rng);
  ObservationSet scaled = obs;
  scaled.x1.data *= 13.0;
  scaled.x2.data *= 13.0;
  const auto p = random_params(rng);
  const Vec mean = gaussian_vector(2 * kBins, rng);
  const Vec h = estimate_rtf(obs.x1, obs.x2);
  const auto a = ls_enhance(p, h, obs, EnhanceConfig{}, mean);
  const auto b = ls_enhance(p, h, scaled, EnhanceConfig{}, mean);
  EXPECT_LT((a.rtf - b.rtf).cwiseAbs().maxCoeff(),
            1e-9 * a.rtf.cwiseAbs().maxCoeff());
}

TEST(LsEnhance, Deterministic) {
  Rng rng(7);
  const ObservationSet obs = random_obs(rng);
  const auto p = random_params(rng);
  const Vec mean = Vec::Zero(2 * kBins);
  const Vec h = estimate_rtf(obs.x1, obs.x2);
  EXPECT_EQ(ls_enhance(p, h, obs, EnhanceConfig{}, mean).rtf,
            ls_enhance(p, h, obs, EnhanceConfig{}, mean).rtf);
}

TEST(LsEnhance, Errors) {
  Rng rng(8);
  ObservationSet obs = random_obs(rng);
  const auto p = random_params(rng);
  const Vec mean = Vec::Zero(2 * kBins);
  const Vec h = Vec::Zero(2 * kBins);
  EXPECT_THROW(ls_enhance(p, h, obs, EnhanceConfig{-1.0, 5}, mean), Error);
  EXPECT_THROW(ls_enhance(p, Vec(Vec::Zero(6)), obs, EnhanceConfig{}, mean),
               Error);
  obs.x1.data.setZero();
  try {
    ls_enhance(p, h, obs, EnhanceConfig{}, mean);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("silent reference"), std::string::npos);
  }
}

TEST(Denoise, ConstantDecoderReturnsItsOutput) {
  Rng rng(9);
  const Vec target = gaussian_vector(2 * kBins, rng);
  const Vec mean = gaussian_vector(2 * kBins, rng);
  const auto p = constant_decoder(target, mean, rng);
  EXPECT_LT((denoise(p, gaussian_vector(2 * kBins, rng), mean) - target)
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(Variants, NamesRoundTrip) {
  for (auto v : {Variant::Raw, Variant::Mean, Variant::Dn, Variant::Ls,
                 Variant::Ft, Variant::Gt, Variant::FtGt})
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  EXPECT_TRUE(needs_finetuned(Variant::FtGt));
  EXPECT_FALSE(needs_finetuned(Variant::Gt));
  EXPECT_THROW(variant_from_string("oracle"), Error);
}

// A small model trained on simulated room data.
class TrainedFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    GridSpec g;
    g.counts = {5, 3, 2};
    DatasetConfig dc;
    dc.room.t60 = 0.1;
    dc.n_test = 3;
    dc.n_val = 3;
    dc.duration_s = 2.0;
    dc.seed = 21;
    ds_ = new RtfDataset(build_dataset(make_grid(g), dc));
    TrainingConfig tc;
    tc.arch.encoder_hidden = {64, 32};
    tc.arch.decoder_hidden = {32, 64};
    tc.batch_size = 16;
    tc.max_epochs = 40;
    tc.seed = 22;
    params_ = new VaeParams<double>(train(*ds_, tc).params);
  }
  static void TearDownTestSuite() {
    delete ds_;
    delete params_;
  }
  static RtfDataset* ds_;
  static VaeParams<double>* params_;
};
RtfDataset* TrainedFixture::ds_ = nullptr;
VaeParams<double>* TrainedFixture::params_ = nullptr;

TEST_F(TrainedFixture, NoiselessCostNonIncreasing) {
  for (std::size_t i = 0; i < ds_->test_positions.size(); ++i) {
    SceneSpec s;
    s.t60 = 0.1;
    s.source_pos = ds_->test_positions[i];
    s.seed = 30 + i;
    const auto obs = synthesize_scene(s, 2.0);
    const ObservationSet frames{stft(obs.x1), stft(obs.x2)};
    const Vec h = estimate_rtf(frames.x1, frames.x2);
    const auto r =
        ls_enhance(*params_, h, frames, EnhanceConfig{}, ds_->mean_rtf);
    for (std::size_t t = 1; t < r.cost.size(); ++t)
      EXPECT_LE(r.cost[t], r.cost[t - 1] * (1.0 + 1e-12))
          << "position " << i << " iteration " << t;
  }
}

TEST_F(TrainedFixture, MeanBaselineIsTrainingMean) {
  EXPECT_EQ(mean_baseline(*ds_), ds_->mean_rtf);
  EXPECT_THROW(mean_baseline(RtfDataset{}), Error);
}

}  // namespace
}  // namespace rtfvae
