// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rtfvae {

namespace {

Mat gather_columns(const Mat& m, const std::vector<Index>& idx,
                   std::size_t from, std::size_t to) {
  Mat out(m.rows(), static_cast<Index>(to - from));
  for (std::size_t j = from; j < to; ++j)
    out.col(static_cast<Index>(j - from)) = m.col(idx[j]);
  return out;
}

// One pass over shuffled minibatches; returns the size-weighted mean loss.
double run_epoch(VaeParams<double>& params, AdamState<double>& adam,
                 const Mat& inputs, const Mat& targets, double gamma,
                 int batch_size, double lr, Rng& rng) {
  std::vector<Index> order(static_cast<std::size_t>(inputs.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  double total = 0.0;
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    const Mat x = gather_columns(inputs, order, start, stop);
    const Mat t = &inputs == &targets ? x
                                      : gather_columns(targets, order, start,
                                                       stop);
    const Mat e = gaussian_matrix(params.latent(), x.cols(), rng);
    const auto lg = vae_loss_and_gradient(params, x, t, e, gamma);
    if (!std::isfinite(lg.loss))
      throw NumericalError("training loss is not finite");
    adam_step(adam, params, lg.grad, lr);
    total += lg.loss * static_cast<double>(x.cols());
  }
  return total / static_cast<double>(inputs.cols());
}

}  // namespace

void validate(const TrainingConfig& cfg) {
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0))
    throw Error("training: gamma must be in [0, 1]");
  if (cfg.batch_size < 1) throw Error("training: batch_size must be >= 1");
  if (cfg.arch.latent < 1) throw Error("training: q must be >= 1");
  if (!(cfg.lr > 0.0)) throw Error("training: lr must be > 0");
  if (!(cfg.lr_drop_factor >= 1.0))
    throw Error("training: lr_drop_factor must be >= 1");
  if (cfg.patience_lr < 1 || cfg.patience_stop < 1)
    throw Error("training: patience values must be >= 1");
  if (cfg.max_epochs < 1) throw Error("training: max_epochs must be >= 1");
}

double evaluate_loss(const VaeParams<double>& params, const Mat& inputs,
                     const Mat& targets, double gamma) {
  const LatentPosterior<double> post = encode(params, inputs);
  return vae_cost(targets, decode(params, post.mu), post, gamma);
}

TrainResult train(const Mat& train_centered, const Mat& validation_centered,
                  const TrainingConfig& cfg) {
  validate(cfg);
  if (train_centered.cols() < 1) throw Error("training: empty training set");
  if (validation_centered.cols() < 1)
    throw Error("training: validation set empty");
  if (train_centered.rows() != cfg.arch.dim ||
      validation_centered.rows() != cfg.arch.dim)
    throw Error("training: data dimension does not match architecture");

  TrainResult result;
  result.params = make_vae(cfg.arch);
  Rng init_rng(derive_seed(cfg.seed, 1));
  glorot_init(result.params, init_rng);
  Rng rng(derive_seed(cfg.seed, 2));
  AdamState<double> adam(result.params.parameter_count(), cfg.adam);

  VaeParams<double> best = result.params;
  TrainReport& report = result.report;
  double lr = cfg.lr;
  double best_for_lr = std::numeric_limits<double>::infinity();
  double best_for_stop = best_for_lr;
  int wait_lr = 0;
  int wait_stop = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    report.learning_rate.push_back(lr);
    report.train_loss.push_back(run_epoch(result.params, adam, train_centered,
                                          train_centered, cfg.gamma,
                                          cfg.batch_size, lr, rng));
    const double val = evaluate_loss(result.params, validation_centered,
                                     validation_centered, cfg.gamma);
    if (!std::isfinite(val))
      throw NumericalError("validation loss is not finite");
    report.validation_loss.push_back(val);
    report.epochs_run = epoch + 1;

    if (report.best_epoch < 0 || val < report.best_validation_loss) {
      report.best_epoch = epoch;
      report.best_validation_loss = val;
      best = result.params;
    }
    if (val < best_for_lr - cfg.min_delta) {
      best_for_lr = val;
      wait_lr = 0;
    } else if (++wait_lr >= cfg.patience_lr) {
      lr /= cfg.lr_drop_factor;
      wait_lr = 0;
    }
    if (val < best_for_stop - cfg.min_delta) {
      best_for_stop = val;
      wait_stop = 0;
    } else if (++wait_stop >= cfg.patience_stop) {
      break;
    }
  }
  result.params = std::move(best);
  return result;
}

TrainResult train(const RtfDataset& ds, const TrainingConfig& cfg) {
  return train(center(ds.train, ds.mean_rtf),
               center(ds.validation, ds.mean_rtf), cfg);
}

VaeParams<double> fine_tune(const VaeParams<double>& params, const Mat& noisy,
                            const Mat& clean, const Vec& mean_rtf,
                            const TrainingConfig& train_cfg,
                            const FineTuneConfig& cfg) {
  check_params(params);
  if (noisy.cols() < 1) throw Error("fine_tune: empty pairs");
  if (noisy.cols() != clean.cols() || noisy.rows() != clean.rows())
    throw Error("fine_tune: noisy/clean shape mismatch");
  if (cfg.epochs < 0) throw Error("fine_tune: epochs must be >= 0");
  if (!(cfg.lr > 0.0)) throw Error("fine_tune: lr must be > 0");

  VaeParams<double> out = params;
  const Mat x = center(noisy, mean_rtf);
  const Mat t = center(clean, mean_rtf);
  Rng rng(derive_seed(cfg.seed, 3));
  AdamState<double> adam(out.parameter_count(), train_cfg.adam);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    run_epoch(out, adam, x, t, train_cfg.gamma, train_cfg.batch_size, cfg.lr,
              rng);
  return out;
}

}  // namespace rtfvae
