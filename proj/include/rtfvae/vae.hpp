// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rtfvae/common.hpp"

namespace rtfvae {

enum class Activation { Swish, Linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

/// x * sigmoid(x)
template <typename Scalar>
Scalar swish(Scalar x) {
  return x * sigmoid(x);
}

template <typename Scalar>
Scalar swish_derivative(Scalar x) {
  const Scalar s = sigmoid(x);
  return s + x * s * (Scalar(1) - s);
}

/// y = act(W x + b); W is out x in.
template <typename Scalar>
struct DenseLayer {
  MatrixT<Scalar> weight;
  VectorT<Scalar> bias;
  Activation activation = Activation::Linear;

  Index in_dim() const { return weight.cols(); }
  Index out_dim() const { return weight.rows(); }
};

/// Forward intermediates of a batch (columns are samples).
template <typename Scalar>
struct ForwardCache {
  std::vector<MatrixT<Scalar>> inputs;  // input of every layer
  std::vector<MatrixT<Scalar>> pre;     // pre-activations
};

/// Chain of dense layers. Also used as the container for its own gradient.
template <typename Scalar>
struct Network {
  std::vector<DenseLayer<Scalar>> layers;

  Index in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  Index out_dim() const {
    return layers.empty() ? 0 : layers.back().out_dim();
  }

  Index parameter_count() const {
    Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  Network zeros_like() const {
    Network g = *this;
    for (auto& l : g.layers) {
      l.weight.setZero();
      l.bias.setZero();
    }
    return g;
  }

  MatrixT<Scalar> forward(const MatrixT<Scalar>& x,
                          ForwardCache<Scalar>* cache = nullptr) const {
    if (x.rows() != in_dim())
      throw Error("network: input dimension " + std::to_string(x.rows()) +
                  " != " + std::to_string(in_dim()));
    if (cache) {
      cache->inputs.clear();
      cache->pre.clear();
    }
    MatrixT<Scalar> a = x;
    for (const auto& l : layers) {
      MatrixT<Scalar> z = (l.weight * a).colwise() + l.bias;
      if (cache) {
        cache->inputs.push_back(std::move(a));
        cache->pre.push_back(z);
      }
      if (l.activation == Activation::Swish)
        a = z.unaryExpr([](Scalar v) { return swish(v); });
      else
        a = std::move(z);
    }
    return a;
  }

  /// Accumulates parameter gradients into `grad` and returns dJ/dx.
  MatrixT<Scalar> backward(const ForwardCache<Scalar>& cache,
                           const MatrixT<Scalar>& d_out,
                           Network& grad) const {
    MatrixT<Scalar> delta = d_out;
    for (std::size_t i = layers.size(); i-- > 0;) {
      const auto& l = layers[i];
      if (l.activation == Activation::Swish)
        delta.array() *= cache.pre[i]
                             .unaryExpr([](Scalar v) { return swish_derivative(v); })
                             .array();
      grad.layers[i].weight.noalias() += delta * cache.inputs[i].transpose();
      grad.layers[i].bias += delta.rowwise().sum();
      delta = (l.weight.transpose() * delta).eval();
    }
    return delta;
  }
};

struct VaeArchitecture {
  int dim = 256;
  int latent = 5;
  std::vector<int> encoder_hidden{256, 128, 64};
  std::vector<int> decoder_hidden{64, 128, 256};
};

/// Closed-form count of weights and biases of both networks.
Index parameter_count(const VaeArchitecture& arch);

template <typename Scalar>
struct VaeParams {
  Network<Scalar> encoder;  // dim -> ... -> 2 * latent (mu, log-variance)
  Network<Scalar> decoder;  // latent -> ... -> dim

  Index dim() const { return encoder.in_dim(); }
  Index latent() const { return decoder.in_dim(); }
  Index parameter_count() const {
    return encoder.parameter_count() + decoder.parameter_count();
  }
  VaeParams zeros_like() const {
    return {encoder.zeros_like(), decoder.zeros_like()};
  }
};

namespace detail {

template <typename Scalar>
Network<Scalar> make_network(int in, const std::vector<int>& hidden, int out) {
  Network<Scalar> net;
  int prev = in;
  for (int h : hidden) {
    net.layers.push_back({MatrixT<Scalar>::Zero(h, prev),
                          VectorT<Scalar>::Zero(h), Activation::Swish});
    prev = h;
  }
  net.layers.push_back({MatrixT<Scalar>::Zero(out, prev),
                        VectorT<Scalar>::Zero(out), Activation::Linear});
  return net;
}

}  // namespace detail

/// All-zero parameters with the given architecture.
template <typename Scalar = double>
VaeParams<Scalar> make_vae(const VaeArchitecture& arch) {
  if (arch.dim < 1 || arch.latent < 1)
    throw Error("vae: dim and latent must be >= 1");
  return {detail::make_network<Scalar>(arch.dim, arch.encoder_hidden,
                                       2 * arch.latent),
          detail::make_network<Scalar>(arch.latent, arch.decoder_hidden,
                                       arch.dim)};
}

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
template <typename Scalar>
void glorot_init(VaeParams<Scalar>& params, Rng& rng) {
  for (auto* net : {&params.encoder, &params.decoder})
    for (auto& l : net->layers) {
      const double limit =
          std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
      std::uniform_real_distribution<double> dist(-limit, limit);
      for (Index j = 0; j < l.weight.cols(); ++j)
        for (Index i = 0; i < l.weight.rows(); ++i)
          l.weight(i, j) = static_cast<Scalar>(dist(rng));
      l.bias.setZero();
    }
}

/// Encoder output split into posterior mean and log-variance (Q x B each).
template <typename Scalar>
struct LatentPosterior {
  MatrixT<Scalar> mu;
  MatrixT<Scalar> log_var;
};

template <typename Scalar>
LatentPosterior<Scalar> encode(const VaeParams<Scalar>& params,
                               const MatrixT<Scalar>& h,
                               ForwardCache<Scalar>* cache = nullptr) {
  const MatrixT<Scalar> out = params.encoder.forward(h, cache);
  const Index q = out.rows() / 2;
  return {out.topRows(q), out.bottomRows(q)};
}

template <typename Scalar>
MatrixT<Scalar> decode(const VaeParams<Scalar>& params,
                       const MatrixT<Scalar>& z,
                       ForwardCache<Scalar>* cache = nullptr) {
  return params.decoder.forward(z, cache);
}

/// z = mu + exp(log_var / 2) * e
template <typename Scalar>
MatrixT<Scalar> reparameterize(const LatentPosterior<Scalar>& post,
                               const MatrixT<Scalar>& e) {
  return post.mu + ((post.log_var.array() / Scalar(2)).exp() * e.array())
                       .matrix();
}

/// Draws e ~ N(0, I) from `rng` and reparameterizes.
template <typename Scalar>
MatrixT<Scalar> sample_latent(const LatentPosterior<Scalar>& post, Rng& rng) {
  const Mat e = gaussian_matrix(post.mu.rows(), post.mu.cols(), rng);
  return reparameterize(post, MatrixT<Scalar>(e.template cast<Scalar>()));
}

/// J = gamma * Avg|h - r|^2 / Avg|h|^2
///     - (1 - gamma) / (2Q) * Avg(sum log_var - |mu|^2 - sum exp(log_var))
/// with averages over batch columns. `targets` supplies h.
template <typename Scalar>
Scalar vae_cost(const MatrixT<Scalar>& targets,
                const MatrixT<Scalar>& reconstructions,
                const LatentPosterior<Scalar>& post, Scalar gamma) {
  if (targets.rows() != reconstructions.rows() ||
      targets.cols() != reconstructions.cols() ||
      post.mu.cols() != targets.cols() || post.log_var.cols() != targets.cols())
    throw Error("vae_cost: batch shape mismatch");
  if (targets.cols() < 1) throw Error("vae_cost: empty batch");
  const Scalar energy = targets.squaredNorm();
  if (!(energy > Scalar(0))) throw Error("vae_cost: all-zero batch");
  const auto b = static_cast<Scalar>(targets.cols());
  const auto q = static_cast<Scalar>(post.mu.rows());
  const Scalar rec = (targets - reconstructions).squaredNorm() / energy;
  const Scalar kl = (post.log_var.sum() - post.mu.squaredNorm() -
                     post.log_var.array().exp().sum()) /
                    b;
  return gamma * rec - (Scalar(1) - gamma) / (Scalar(2) * q) * kl;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss{};
  VaeParams<Scalar> grad;
};

/// Cost of reconstructing `targets` from `inputs` through the sampled
/// latent z = mu + exp(log_var/2) e, and its gradient with `e` held fixed.
template <typename Scalar>
LossAndGradient<Scalar> vae_loss_and_gradient(const VaeParams<Scalar>& params,
                                              const MatrixT<Scalar>& inputs,
                                              const MatrixT<Scalar>& targets,
                                              const MatrixT<Scalar>& e,
                                              Scalar gamma) {
  ForwardCache<Scalar> enc_cache, dec_cache;
  const LatentPosterior<Scalar> post = encode(params, inputs, &enc_cache);
  if (e.rows() != post.mu.rows() || e.cols() != post.mu.cols())
    throw Error("vae: noise shape mismatch");
  const MatrixT<Scalar> z = reparameterize(post, e);
  const MatrixT<Scalar> rec = decode(params, z, &dec_cache);

  LossAndGradient<Scalar> out;
  out.loss = vae_cost(targets, rec, post, gamma);
  out.grad = params.zeros_like();

  const Scalar energy = targets.squaredNorm();
  const auto b = static_cast<Scalar>(targets.cols());
  const auto q = static_cast<Scalar>(post.mu.rows());
  const Scalar kl_w = (Scalar(1) - gamma) / (Scalar(2) * q * b);

  const MatrixT<Scalar> d_rec =
      (Scalar(-2) * gamma / energy) * (targets - rec);
  const MatrixT<Scalar> d_z =
      params.decoder.backward(dec_cache, d_rec, out.grad.decoder);
  const auto std_half =
      (post.log_var.array() / Scalar(2)).exp() / Scalar(2);  // d sigma / d lv
  MatrixT<Scalar> d_enc(2 * post.mu.rows(), post.mu.cols());
  d_enc.topRows(post.mu.rows()) = d_z + kl_w * Scalar(2) * post.mu;
  d_enc.bottomRows(post.mu.rows()) =
      (-kl_w * (Scalar(1) - post.log_var.array().exp()) +
       d_z.array() * e.array() * std_half)
          .matrix();
  params.encoder.backward(enc_cache, d_enc, out.grad.encoder);
  return out;
}

/// Ordinary VAE objective on `batch`; draws e from `rng`.
template <typename Scalar>
LossAndGradient<Scalar> vae_gradients(const VaeParams<Scalar>& params,
                                      const MatrixT<Scalar>& batch,
                                      Scalar gamma, Rng& rng) {
  const Mat e = gaussian_matrix(params.latent(), batch.cols(), rng);
  return vae_loss_and_gradient(params, batch, batch,
                               MatrixT<Scalar>(e.template cast<Scalar>()),
                               gamma);
}

/// Parameters flattened in declaration order: encoder then decoder, each
/// layer's weight row by row followed by its bias.
template <typename Scalar>
VectorT<Scalar> flatten(const VaeParams<Scalar>& params) {
  VectorT<Scalar> out(params.parameter_count());
  Index pos = 0;
  for (const auto* net : {&params.encoder, &params.decoder})
    for (const auto& l : net->layers) {
      for (Index i = 0; i < l.weight.rows(); ++i)
        for (Index j = 0; j < l.weight.cols(); ++j) out[pos++] = l.weight(i, j);
      out.segment(pos, l.bias.size()) = l.bias;
      pos += l.bias.size();
    }
  return out;
}

template <typename Scalar>
void unflatten(const VectorT<Scalar>& flat, VaeParams<Scalar>& params) {
  if (flat.size() != params.parameter_count())
    throw Error("unflatten: parameter count mismatch");
  Index pos = 0;
  for (auto* net : {&params.encoder, &params.decoder})
    for (auto& l : net->layers) {
      for (Index i = 0; i < l.weight.rows(); ++i)
        for (Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = flat[pos++];
      l.bias = flat.segment(pos, l.bias.size());
      pos += l.bias.size();
    }
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam over a flat parameter vector with bias-corrected moments.
template <typename Scalar>
struct AdamState {
  VectorT<Scalar> m, v;
  long step = 0;
  AdamConfig cfg;

  explicit AdamState(Index n = 0, AdamConfig c = {})
      : m(VectorT<Scalar>::Zero(n)), v(VectorT<Scalar>::Zero(n)), cfg(c) {}

  void apply(VectorT<Scalar>& params, const VectorT<Scalar>& grad,
             Scalar lr) {
    if (params.size() != m.size() || grad.size() != m.size())
      throw Error("adam: state dimension mismatch");
    ++step;
    const Scalar b1 = static_cast<Scalar>(cfg.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg.beta2);
    m = b1 * m + (Scalar(1) - b1) * grad;
    v = b2 * v + (Scalar(1) - b2) * grad.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(step));
    const Scalar c2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(step));
    params.array() -=
        lr * (m.array() / c1) /
        ((v.array() / c2).sqrt() + static_cast<Scalar>(cfg.epsilon));
  }
};

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, VaeParams<Scalar>& params,
               const VaeParams<Scalar>& grad, Scalar lr) {
  VectorT<Scalar> flat = flatten(params);
  state.apply(flat, flatten(grad), lr);
  unflatten(flat, params);
}

/// Throws if the parameters are malformed or non-finite.
template <typename Scalar>
void check_params(const VaeParams<Scalar>& params) {
  if (params.encoder.layers.empty() || params.decoder.layers.empty())
    throw Error("vae: empty network");
  if (params.encoder.out_dim() != 2 * params.decoder.in_dim())
    throw Error("vae: encoder output must be twice the latent dimension");
  if (params.decoder.out_dim() != params.encoder.in_dim())
    throw Error("vae: decoder output must match encoder input");
  for (const auto* net : {&params.encoder, &params.decoder}) {
    Index prev = net->in_dim();
    for (const auto& l : net->layers) {
      if (l.in_dim() != prev || l.bias.size() != l.out_dim())
        throw Error("vae: layer dimensions do not chain");
      if (!l.weight.allFinite() || !l.bias.allFinite())
        throw NumericalError("vae: non-finite parameters");
      prev = l.out_dim();
    }
  }
}

}  // namespace rtfvae
