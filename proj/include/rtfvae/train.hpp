// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <vector>

#include "rtfvae/rtf.hpp"
#include "rtfvae/vae.hpp"

namespace rtfvae {

struct TrainingConfig {
  VaeArchitecture arch;
  double gamma = 0.95;
  // Decoder output variance of the Gaussian likelihood. It only rescales the
  // reconstruction term and is absorbed by gamma; kept for the manifest.
  double sigma_x_sq = 0.5;
  int batch_size = 128;
  double lr = 1e-3;
  double lr_drop_factor = 5.0;
  int patience_lr = 5;
  int patience_stop = 10;
  double min_delta = 1e-3;
  int max_epochs = 500;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

void validate(const TrainingConfig& cfg);

struct TrainReport {
  std::vector<double> train_loss;       // mean minibatch loss per epoch
  std::vector<double> validation_loss;  // deterministic (z = mu) per epoch
  std::vector<double> learning_rate;    // rate used during each epoch
  int epochs_run = 0;
  int best_epoch = -1;  // 0-based epoch whose parameters were restored
  double best_validation_loss = 0.0;
};

struct TrainResult {
  VaeParams<double> params;
  TrainReport report;
};

/// Deterministic (z = mu) cost over a whole set, inputs and targets centered.
double evaluate_loss(const VaeParams<double>& params, const Mat& inputs,
                     const Mat& targets, double gamma);

/// Minibatch Adam on centered training data with plateau learning-rate
/// drops and early stopping; restores the parameters of the epoch with the
/// lowest validation loss.
TrainResult train(const Mat& train_centered, const Mat& validation_centered,
                  const TrainingConfig& cfg);
TrainResult train(const RtfDataset& ds, const TrainingConfig& cfg);

struct FineTuneConfig {
  int epochs = 15;
  double lr = 1e-4;
  std::uint64_t seed = 0;
};

/// Continues training with noisy inputs and clean targets (both uncentered
/// columns, centered here with `mean_rtf`).
VaeParams<double> fine_tune(const VaeParams<double>& params, const Mat& noisy,
                            const Mat& clean, const Vec& mean_rtf,
                            const TrainingConfig& train_cfg,
                            const FineTuneConfig& cfg);

// Persistence: JSON manifest plus flat float64 weights (see flatten()).
struct ModelFile {
  VaeParams<double> params;
  TrainingConfig config;
  std::string weights_file;
};

void save_model(const std::filesystem::path& manifest,
                const VaeParams<double>& params, const TrainingConfig& cfg);
ModelFile load_model(const std::filesystem::path& manifest);

}  // namespace rtfvae
