// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rtfvae/enhance.hpp"
#include "rtfvae/eval.hpp"
#include "rtfvae/room.hpp"
#include "rtfvae/rtf.hpp"
#include "rtfvae/train.hpp"

namespace rtfvae {

/// Malformed or invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct FineTuneSection {
  FineTuneConfig cfg;
  std::vector<NoiseKind> noise_kinds{NoiseKind::Babble};
  std::vector<double> snr_grid{-10, -5, 0, 5, 10};
};

struct EnhanceSection {
  EnhanceConfig cfg;
  NoiseKind noise_kind = NoiseKind::Babble;
  double snr_db = 10.0;
  int test_index = 0;
};

struct PathsSection {
  std::string dataset = "out/dataset_t{t60}";
  std::string model = "out/model_t{t60}.json";
  std::string model_ft = "out/model_ft_t{t60}.json";
  std::string results = "out/results.csv";
  std::string trials;  // empty: no per-trial CSV
};

struct RunConfig {
  std::uint64_t seed = 0;
  SceneSpec room;                    // t60 ignored, see t60_grid
  std::vector<double> t60_grid{0.3};
  GridSpec grid;
  DatasetConfig dataset;             // room and seed filled per t60
  TrainingConfig training;
  FineTuneSection finetune;
  EnhanceSection enhance;
  SweepSpec sweep;                   // t60_grid mirrors room.t60
  SceneSampler sampler;              // duration and babble sizes
  PathsSection paths;

  DatasetConfig dataset_config(double t60) const;
  TrainingConfig training_config() const;
  FineTuneConfig finetune_config() const;
  SweepSpec sweep_spec() const;
  SceneSampler scene_sampler(double t60) const;
  std::filesystem::path dataset_dir(double t60) const;
  std::filesystem::path model_path(double t60) const;
  std::filesystem::path model_ft_path(double t60) const;
};

/// Parses and validates a configuration; unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Replaces `{t60}` with the shortest decimal form of t60.
std::string expand_t60(const std::string& pattern, double t60);

/// Human-readable description of every configuration key.
std::string config_reference();

}  // namespace rtfvae
