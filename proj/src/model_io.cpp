// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <fstream>

#include <json.hpp>

#include "rtfvae/train.hpp"

namespace rtfvae {

namespace {

using nlohmann::json;

json network_to_json(const Network<double>& net) {
  json layers = json::array();
  for (const auto& l : net.layers)
    layers.push_back({{"in", l.in_dim()},
                      {"out", l.out_dim()},
                      {"activation", to_string(l.activation)}});
  return layers;
}

Network<double> network_from_json(const json& layers) {
  Network<double> net;
  for (const auto& l : layers) {
    const auto in = l.at("in").get<Index>();
    const auto out = l.at("out").get<Index>();
    if (in < 1 || out < 1) throw Error("model: invalid layer shape");
    net.layers.push_back(
        {Mat::Zero(out, in), Vec::Zero(out),
         activation_from_string(l.at("activation").get<std::string>())});
  }
  return net;
}

std::vector<int> hidden_widths(const Network<double>& net) {
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i)
    out.push_back(static_cast<int>(net.layers[i].out_dim()));
  return out;
}

}  // namespace

void save_model(const std::filesystem::path& manifest,
                const VaeParams<double>& params, const TrainingConfig& cfg) {
  check_params(params);
  if (manifest.has_parent_path())
    std::filesystem::create_directories(manifest.parent_path());
  std::filesystem::path weights = manifest;
  weights.replace_extension(".f64");

  json j;
  j["format"] = "rtfvae-model-1";
  j["dim"] = params.dim();
  j["latent"] = params.latent();
  j["parameter_count"] = params.parameter_count();
  j["encoder"] = network_to_json(params.encoder);
  j["decoder"] = network_to_json(params.decoder);
  j["weights_file"] = weights.filename().string();
  j["weights_layout"] =
      "float64 little-endian; encoder then decoder; per layer the weight "
      "matrix (out x in) row by row, then the bias";
  j["training"] = {{"gamma", cfg.gamma},
                   {"sigma_x_sq", cfg.sigma_x_sq},
                   {"batch_size", cfg.batch_size},
                   {"lr", cfg.lr},
                   {"lr_drop_factor", cfg.lr_drop_factor},
                   {"patience_lr", cfg.patience_lr},
                   {"patience_stop", cfg.patience_stop},
                   {"min_delta", cfg.min_delta},
                   {"max_epochs", cfg.max_epochs},
                   {"adam_beta1", cfg.adam.beta1},
                   {"adam_beta2", cfg.adam.beta2},
                   {"adam_epsilon", cfg.adam.epsilon},
                   {"seed", cfg.seed}};
  std::ofstream os(manifest);
  if (!os) throw Error("cannot open " + manifest.string() + " for writing");
  os << j.dump(2) << "\n";

  const Vec flat = flatten(params);
  std::ofstream ws(weights, std::ios::binary);
  if (!ws) throw Error("cannot open " + weights.string() + " for writing");
  ws.write(reinterpret_cast<const char*>(flat.data()),
           static_cast<std::streamsize>(flat.size() * sizeof(double)));
}

ModelFile load_model(const std::filesystem::path& manifest) {
  std::ifstream is(manifest);
  if (!is) throw Error("model: cannot open " + manifest.string());
  const json j = json::parse(is);
  if (j.value("format", "") != "rtfvae-model-1")
    throw Error("model: unsupported manifest format");

  ModelFile out;
  out.params.encoder = network_from_json(j.at("encoder"));
  out.params.decoder = network_from_json(j.at("decoder"));
  out.weights_file = j.at("weights_file").get<std::string>();

  const std::filesystem::path weights =
      manifest.parent_path() / out.weights_file;
  std::ifstream ws(weights, std::ios::binary | std::ios::ate);
  if (!ws) throw Error("model: cannot open " + weights.string());
  const Index count = out.params.parameter_count();
  if (static_cast<Index>(ws.tellg()) !=
      count * static_cast<Index>(sizeof(double)))
    throw Error("model: weights file size does not match manifest");
  ws.seekg(0);
  Vec flat(count);
  ws.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  unflatten(flat, out.params);
  check_params(out.params);

  TrainingConfig& c = out.config;
  c.arch.dim = static_cast<int>(out.params.dim());
  c.arch.latent = static_cast<int>(out.params.latent());
  c.arch.encoder_hidden = hidden_widths(out.params.encoder);
  c.arch.decoder_hidden = hidden_widths(out.params.decoder);
  if (j.contains("training")) {
    const json& t = j.at("training");
    c.gamma = t.value("gamma", c.gamma);
    c.sigma_x_sq = t.value("sigma_x_sq", c.sigma_x_sq);
    c.batch_size = t.value("batch_size", c.batch_size);
    c.lr = t.value("lr", c.lr);
    c.lr_drop_factor = t.value("lr_drop_factor", c.lr_drop_factor);
    c.patience_lr = t.value("patience_lr", c.patience_lr);
    c.patience_stop = t.value("patience_stop", c.patience_stop);
    c.min_delta = t.value("min_delta", c.min_delta);
    c.max_epochs = t.value("max_epochs", c.max_epochs);
    c.adam.beta1 = t.value("adam_beta1", c.adam.beta1);
    c.adam.beta2 = t.value("adam_beta2", c.adam.beta2);
    c.adam.epsilon = t.value("adam_epsilon", c.adam.epsilon);
    c.seed = t.value("seed", c.seed);
  }
  return out;
}

}  // namespace rtfvae
