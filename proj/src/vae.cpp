// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/vae.hpp"

namespace rtfvae {

std::string to_string(Activation a) {
  return a == Activation::Swish ? "swish" : "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "swish") return Activation::Swish;
  if (name == "linear") return Activation::Linear;
  throw Error("unknown activation '" + name + "'");
}

Index parameter_count(const VaeArchitecture& arch) {
  auto chain = [](int in, const std::vector<int>& hidden, int out) {
    Index n = 0;
    int prev = in;
    for (int h : hidden) {
      n += static_cast<Index>(prev + 1) * h;
      prev = h;
    }
    return n + static_cast<Index>(prev + 1) * out;
  };
  return chain(arch.dim, arch.encoder_hidden, 2 * arch.latent) +
         chain(arch.latent, arch.decoder_hidden, arch.dim);
}

}  // namespace rtfvae
