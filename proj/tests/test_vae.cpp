// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>

#include "rtfvae/vae.hpp"

namespace rtfvae {
namespace {

VaeArchitecture tiny_arch() {
  VaeArchitecture a;
  a.dim = 8;
  a.latent = 2;
  a.encoder_hidden = {7, 5};
  a.decoder_hidden = {5, 7};
  return a;
}

VaeParams<double> random_params(const VaeArchitecture& arch, Rng& rng,
                                double scale = 0.5) {
  VaeParams<double> p = make_vae(arch);
  Vec flat = gaussian_vector(p.parameter_count(), rng) * scale;
  unflatten(flat, p);
  return p;
}

TEST(Activation, SwishValues) {
  EXPECT_EQ(swish(0.0), 0.0);
  EXPECT_EQ(swish_derivative(0.0), 0.5);
  EXPECT_NEAR(swish(1.0), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  for (double x : {-3.0, -0.4, 0.7, 5.0}) {
    const double h = 1e-6;
    EXPECT_NEAR(swish_derivative(x), (swish(x + h) - swish(x - h)) / (2 * h),
                1e-9);
  }
}

TEST(Architecture, DefaultParameterCount) {
  const VaeArchitecture arch;
  EXPECT_EQ(parameter_count(arch), 215114);
  EXPECT_EQ(make_vae(arch).parameter_count(), 215114);
  EXPECT_NEAR(static_cast<double>(parameter_count(arch)), 2.15e5, 0.03 * 2.15e5);
}

TEST(Architecture, LayerShapes) {
  const auto p = make_vae(VaeArchitecture{});
  ASSERT_EQ(p.encoder.layers.size(), 4u);
  EXPECT_EQ(p.encoder.layers[0].weight.rows(), 256);
  EXPECT_EQ(p.encoder.layers[3].weight.rows(), 10);
  EXPECT_EQ(p.encoder.layers[3].activation, Activation::Linear);
  EXPECT_EQ(p.encoder.layers[0].activation, Activation::Swish);
  EXPECT_EQ(p.decoder.layers.back().activation, Activation::Linear);
  EXPECT_EQ(p.latent(), 5);
  EXPECT_EQ(p.dim(), 256);
}

TEST(Vae, ZeroParametersGiveZeroOutputs) {
  const auto p = make_vae(tiny_arch()).zeros_like();
  Rng rng(1);
  const Mat x = gaussian_matrix(8, 4, rng);
  const auto post = encode(p, x);
  EXPECT_EQ(post.mu.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(post.log_var.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(decode(p, Mat(gaussian_matrix(2, 4, rng))).cwiseAbs().maxCoeff(),
            0.0);
}

// Loop-based forward pass, independent of the Eigen expression path.
Vec naive_forward(const Network<double>& net, Vec a) {
  for (const auto& l : net.layers) {
    Vec z(l.out_dim());
    for (Index i = 0; i < l.out_dim(); ++i) {
      double acc = l.bias[i];
      for (Index j = 0; j < l.in_dim(); ++j) acc += l.weight(i, j) * a[j];
      z[i] = l.activation == Activation::Swish ? acc / (1.0 + std::exp(-acc))
                                               : acc;
    }
    a = z;
  }
  return a;
}

TEST(Vae, ForwardMatchesNaiveLoops) {
  Rng rng(2);
  const auto p = random_params(tiny_arch(), rng);
  const Mat x = gaussian_matrix(8, 3, rng);
  const Mat enc = p.encoder.forward(x);
  const Mat dec = p.decoder.forward(enc.topRows(2));
  for (Index b = 0; b < 3; ++b) {
    EXPECT_LT((enc.col(b) - naive_forward(p.encoder, x.col(b)))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
    EXPECT_LT((dec.col(b) - naive_forward(p.decoder, enc.col(b).head(2)))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(Vae, DimensionMismatchRejected) {
  const auto p = make_vae(tiny_arch());
  EXPECT_THROW(encode(p, Mat(Mat::Zero(7, 1))), Error);
  EXPECT_THROW(decode(p, Mat(Mat::Zero(3, 1))), Error);
}

TEST(Latent, NegligibleVarianceReturnsMean) {
  LatentPosterior<double> post{Mat::Constant(3, 4, 0.7),
                               Mat::Constant(3, 4, -1e6)};
  Rng rng(3);
  EXPECT_EQ(sample_latent(post, rng), post.mu);
}

TEST(Latent, SampleMoments) {
  const Index n = 200000;
  LatentPosterior<double> post{Mat::Constant(1, n, 1.5),
                               Mat::Constant(1, n, std::log(4.0))};
  Rng rng(4);
  const Mat z = sample_latent(post, rng);
  const double mean = z.mean();
  const double var = (z.array() - mean).square().mean();
  EXPECT_NEAR(mean, 1.5, 5.0 * 2.0 / std::sqrt(double(n)));
  EXPECT_NEAR(var, 4.0, 0.05);
}

LatentPosterior<double> standard_posterior(Index q, Index b) {
  return {Mat::Zero(q, b), Mat::Zero(q, b)};
}

TEST(Cost, PerfectReconstructionStandardPosterior) {
  Rng rng(5);
  const Mat x = gaussian_matrix(8, 4, rng);
  EXPECT_NEAR(vae_cost<double>(x, x, standard_posterior(2, 4), 0.95), 0.025,
              1e-15);
}

TEST(Cost, ZeroReconstructionStandardPosterior) {
  Rng rng(6);
  const Mat x = gaussian_matrix(8, 4, rng);
  EXPECT_NEAR(vae_cost<double>(x, Mat::Zero(8, 4), standard_posterior(2, 4),
                               0.95),
              0.975, 1e-15);
}

TEST(Cost, GammaOneIsNormalizedError) {
  Rng rng(7);
  const Mat x = gaussian_matrix(8, 4, rng);
  const Mat r = gaussian_matrix(8, 4, rng);
  LatentPosterior<double> post{gaussian_matrix(2, 4, rng),
                               gaussian_matrix(2, 4, rng)};
  EXPECT_NEAR(vae_cost<double>(x, r, post, 1.0),
              (x - r).squaredNorm() / x.squaredNorm(), 1e-15);
}

TEST(Cost, Errors) {
  EXPECT_THROW(vae_cost<double>(Mat(8, 0), Mat(8, 0), standard_posterior(2, 0),
                                0.95),
               Error);
  EXPECT_THROW(vae_cost<double>(Mat::Zero(8, 2), Mat::Zero(8, 2),
                                standard_posterior(2, 2), 0.95),
               Error);
  EXPECT_THROW(vae_cost<double>(Mat::Ones(8, 2), Mat::Zero(8, 3),
                                standard_posterior(2, 2), 0.95),
               Error);
}

TEST(Cost, RegularizerMinimizedAtStandardNormal) {
  const Mat x = Mat::Ones(4, 1);
  const double at_min = vae_cost<double>(x, x, standard_posterior(1, 1), 0.5);
  for (double mu = -2.0; mu <= 2.0; mu += 0.25)
    for (double lv = -2.0; lv <= 2.0; lv += 0.25) {
      LatentPosterior<double> p{Mat::Constant(1, 1, mu),
                                Mat::Constant(1, 1, lv)};
      EXPECT_GE(vae_cost<double>(x, x, p, 0.5), at_min - 1e-15);
    }
}

struct Case {
  VaeParams<double> params;
  Mat x, t, e;
  double gamma;
};

Case random_case(std::uint64_t seed) {
  Rng rng(seed);
  Case c{random_params(tiny_arch(), rng, 0.4), gaussian_matrix(8, 3, rng),
         gaussian_matrix(8, 3, rng), gaussian_matrix(2, 3, rng),
         std::uniform_real_distribution<double>(0.05, 1.0)(rng)};
  if (seed % 2 == 0) c.t = c.x;
  return c;
}

double numeric_check(const Case& c) {
  const Vec analytic =
      flatten(vae_loss_and_gradient(c.params, c.x, c.t, c.e, c.gamma).grad);
  Vec flat = flatten(c.params);
  Vec numeric(flat.size());
  VaeParams<double> p = c.params;
  const double h = 1e-5;
  for (Index i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + h;
    unflatten(flat, p);
    const double up = vae_loss_and_gradient(p, c.x, c.t, c.e, c.gamma).loss;
    flat[i] = keep - h;
    unflatten(flat, p);
    const double down = vae_loss_and_gradient(p, c.x, c.t, c.e, c.gamma).loss;
    flat[i] = keep;
    numeric[i] = (up - down) / (2 * h);
  }
  return (analytic - numeric).cwiseAbs().maxCoeff() /
         std::max(analytic.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Gradient, MatchesCentralDifferences) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) worst = std::max(worst, numeric_check(random_case(s)));
  EXPECT_LE(worst, 1e-4);
}

TEST(Gradient, LinearInGamma) {
  const Case c = random_case(1);
  auto grad = [&](double g) {
    return flatten(vae_loss_and_gradient(c.params, c.x, c.t, c.e, g).grad);
  };
  const Vec g0 = grad(0.0), g1 = grad(1.0), gm = grad(0.3);
  EXPECT_LT((gm - (0.3 * g1 + 0.7 * g0)).cwiseAbs().maxCoeff(),
            1e-12 * (g0.cwiseAbs().maxCoeff() + g1.cwiseAbs().maxCoeff()));
}

TEST(Flatten, RoundTripAndOrder) {
  Rng rng(8);
  auto p = random_params(tiny_arch(), rng);
  const Vec flat = flatten(p);
  // Row-major weights of the first encoder layer come first, then its bias.
  EXPECT_EQ(flat[0], p.encoder.layers[0].weight(0, 0));
  EXPECT_EQ(flat[1], p.encoder.layers[0].weight(0, 1));
  EXPECT_EQ(flat[8], p.encoder.layers[0].weight(1, 0));
  EXPECT_EQ(flat[56], p.encoder.layers[0].bias[0]);
  auto q = make_vae(tiny_arch());
  unflatten(flat, q);
  EXPECT_EQ(flatten(q), flat);
  EXPECT_THROW(unflatten(Vec(3), q), Error);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  AdamState<double> s(3);
  Vec p = Vec::Ones(3);
  s.apply(p, Vec::Constant(3, 2.5), 0.1);
  EXPECT_NEAR(p[0], 0.9, 1e-8);
  AdamState<double> t(3);
  Vec q = Vec::Ones(3);
  t.apply(q, Vec::Constant(3, -1e-3), 0.1);
  EXPECT_NEAR(q[0], 1.1, 1e-5);
}

TEST(Adam, ZeroGradientIsNoOp) {
  AdamState<double> s(4);
  Vec p = Vec::LinSpaced(4, -1, 1);
  const Vec before = p;
  for (int i = 0; i < 3; ++i) s.apply(p, Vec::Zero(4), 0.1);
  EXPECT_EQ(p, before);
}

TEST(Adam, Deterministic) {
  Rng rng(9);
  const Vec g1 = gaussian_vector(5, rng), g2 = gaussian_vector(5, rng);
  auto run = [&] {
    AdamState<double> s(5);
    Vec p = Vec::Zero(5);
    s.apply(p, g1, 0.01);
    s.apply(p, g2, 0.01);
    return p;
  };
  EXPECT_EQ(run(), run());
}

TEST(Glorot, SeededAndBounded) {
  auto a = make_vae(tiny_arch());
  auto b = make_vae(tiny_arch());
  Rng r1(10), r2(10);
  glorot_init(a, r1);
  glorot_init(b, r2);
  EXPECT_EQ(flatten(a), flatten(b));
  const auto& w = a.encoder.layers[0].weight;
  EXPECT_LE(w.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (8 + 7)));
  EXPECT_EQ(a.encoder.layers[0].bias.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NO_THROW(check_params(a));
}

TEST(CheckParams, RejectsNonFinite) {
  auto p = make_vae(tiny_arch());
  p.decoder.layers[1].bias[0] = std::nan("");
  EXPECT_THROW(check_params(p), NumericalError);
}

}  // namespace
}  // namespace rtfvae
