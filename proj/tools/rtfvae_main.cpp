// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Command-line front end: dataset, train, finetune, enhance, sweep.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rtfvae/config.hpp"
#include "rtfvae/enhance.hpp"
#include "rtfvae/eval.hpp"
#include "rtfvae/room.hpp"
#include "rtfvae/rtf.hpp"
#include "rtfvae/train.hpp"

namespace fs = std::filesystem;
using namespace rtfvae;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kMissing = 3, kNumeric = 4 };

class MissingArtifact : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed_override;
  std::string out;
};

RunConfig load(const Options& opt) {
  RunConfig cfg = load_config(opt.config);
  if (opt.seed_override) cfg.seed = *opt.seed_override;
  return cfg;
}

// --out replaces the primary output path of a command; `{t60}` expands.
fs::path output_path(const Options& opt, const fs::path& configured,
                     double t60) {
  return opt.out.empty() ? configured : fs::path(expand_t60(opt.out, t60));
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p))
    throw MissingArtifact(what + " not found: " + p.string());
}

RtfDataset require_dataset(const RunConfig& cfg, double t60) {
  const fs::path dir = cfg.dataset_dir(t60);
  require_file(dir / "meta.json", "dataset");
  return load_dataset(dir);
}

ModelFile require_model(const fs::path& manifest, const std::string& what) {
  require_file(manifest, what);
  return load_model(manifest);
}

std::string num(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int cmd_dataset(const Options& opt) {
  const RunConfig cfg = load(opt);
  const auto grid = make_grid(cfg.grid);
  for (double t60 : cfg.t60_grid) {
    const DatasetConfig dcfg = cfg.dataset_config(t60);
    const RtfDataset ds = build_dataset(grid, dcfg);
    const fs::path dir = output_path(opt, cfg.dataset_dir(t60), t60);
    save_dataset(ds, dir);

    // Clean estimates against the exact transfer-function ratio.
    const ImageSourceModel model =
        make_image_model(dcfg.room.room_dims, t60, dcfg.room.max_order);
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.test_positions.size(); ++i) {
      const RoomResponse rr = simulate_pair(model, ds.test_positions[i],
                                            dcfg.room.mic1_pos,
                                            dcfg.room.mic2_pos);
      const int fft_len =
          static_cast<int>((model.length + 255) / 256 * 256);
      acc += ser_db(ground_truth_rtf(rr, fft_len),
                    ds.test.col(static_cast<Index>(i)));
    }
    std::cout << "t60=" << t60 << " s: train " << ds.train_clean.cols()
              << " (augmented " << ds.train.cols() << "), validation "
              << ds.validation.cols() << ", test " << ds.test.cols()
              << "; clean estimate vs G2/G1 SER "
              << num(acc / static_cast<double>(ds.test_positions.size()))
              << " dB -> " << dir.string() << "\n";
  }
  return kOk;
}

int cmd_train(const Options& opt) {
  const RunConfig cfg = load(opt);
  for (double t60 : cfg.t60_grid) {
    const RtfDataset ds = require_dataset(cfg, t60);
    const TrainingConfig tcfg = cfg.training_config();
    const TrainResult res = train(ds, tcfg);
    const fs::path out = output_path(opt, cfg.model_path(t60), t60);
    save_model(out, res.params, tcfg);
    const Mat test_rec = [&] {
      Mat m(ds.test.rows(), ds.test.cols());
      for (Index i = 0; i < ds.test.cols(); ++i)
        m.col(i) = gt_reconstruct(res.params, ds.test.col(i), ds.mean_rtf);
      return m;
    }();
    std::cout << "t60=" << t60 << " s: " << res.report.epochs_run
              << " epochs, best epoch " << res.report.best_epoch + 1
              << ", best validation loss "
              << num(res.report.best_validation_loss, "%.6f")
              << ", test GT SER " << num(ser(ds.test, test_rec)) << " dB -> "
              << out.string() << "\n";
  }
  return kOk;
}

int cmd_finetune(const Options& opt) {
  const RunConfig cfg = load(opt);
  for (double t60 : cfg.t60_grid) {
    const RtfDataset ds = require_dataset(cfg, t60);
    const ModelFile base = require_model(cfg.model_path(t60), "base model");
    const SceneSampler sampler = cfg.scene_sampler(t60);
    const ImageSourceModel model =
        make_image_model(sampler.base.room_dims, t60, sampler.base.max_order);
    const FineTuneConfig fcfg = cfg.finetune_config();
    const FineTunePairs pairs =
        make_finetune_pairs(ds, sampler, model, cfg.finetune.noise_kinds,
                            cfg.finetune.snr_grid, fcfg.seed);
    const VaeParams<double> ft = fine_tune(base.params, pairs.noisy,
                                           pairs.clean, ds.mean_rtf,
                                           base.config, fcfg);
    const fs::path out = output_path(opt, cfg.model_ft_path(t60), t60);
    save_model(out, ft, base.config);
    std::cout << "t60=" << t60 << " s: fine-tuned on " << pairs.noisy.cols()
              << " pairs for " << fcfg.epochs << " epochs -> " << out.string()
              << "\n";
  }
  return kOk;
}

int cmd_enhance(const Options& opt) {
  const RunConfig cfg = load(opt);
  const double t60 = cfg.t60_grid.front();
  const RtfDataset ds = require_dataset(cfg, t60);
  const ModelFile model = require_model(cfg.model_path(t60), "model");
  std::optional<ModelFile> ft;
  if (fs::exists(cfg.model_ft_path(t60))) ft = load_model(cfg.model_ft_path(t60));

  const auto idx = static_cast<Index>(cfg.enhance.test_index);
  if (idx >= ds.test.cols()) throw ConfigError("enhance.test_index too large");
  const SceneSampler sampler = cfg.scene_sampler(t60);
  const ImageSourceModel room =
      make_image_model(sampler.base.room_dims, t60, sampler.base.max_order);
  const SceneComponents sc =
      sampler.sample(ds.test_positions[static_cast<std::size_t>(idx)],
                     cfg.enhance.noise_kind, derive_seed(cfg.seed, 4), room);
  const MicObservation obs = sc.mix(cfg.enhance.snr_db);
  const ObservationSet frames{stft(obs.x1), stft(obs.x2)};
  const Vec truth = ds.test.col(idx);
  const Vec raw = estimate_rtf(frames.x1, frames.x2);
  const LsResult ls =
      ls_enhance(model.params, raw, frames, cfg.enhance.cfg, ds.mean_rtf);

  std::vector<std::pair<std::string, Vec>> results{
      {"raw", raw},
      {"mean", mean_baseline(ds)},
      {"dn", denoise(model.params, raw, ds.mean_rtf)},
      {"ls", ls.rtf},
      {"gt", gt_reconstruct(model.params, truth, ds.mean_rtf)}};
  if (ft) {
    results.emplace_back("ft", denoise(ft->params, raw, ds.mean_rtf));
    results.emplace_back("ft_gt", gt_reconstruct(ft->params, truth, ds.mean_rtf));
  }
  std::cout << "t60=" << t60 << " s, " << to_string(cfg.enhance.noise_kind)
            << " at " << cfg.enhance.snr_db << " dB, test RTF " << idx << "\n";
  Mat table(truth.size(), static_cast<Index>(results.size()));
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << "  " << results[i].first << ": "
              << num(ser_db(truth, results[i].second)) << " dB\n";
    table.col(static_cast<Index>(i)) = results[i].second;
  }
  std::cout << "  LS cost " << num(ls.cost.front(), "%.6g") << " -> "
            << num(ls.cost.back(), "%.6g") << "\n";
  if (!opt.out.empty()) {
    const fs::path out = expand_t60(opt.out, t60);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_rtf_file(out, table);
    std::cout << "rows (" << results.size() << ", in the order above) -> "
              << out.string() << "\n";
  }
  return kOk;
}

int cmd_sweep(const Options& opt) {
  const RunConfig cfg = load(opt);
  const SweepSpec spec = cfg.sweep_spec();
  bool want_ft = false;
  for (Variant v : spec.variants) want_ft |= needs_finetuned(v);

  std::vector<SweepBundle> bundles;
  for (double t60 : cfg.t60_grid) {
    SweepBundle b;
    b.t60 = t60;
    b.dataset = require_dataset(cfg, t60);
    b.params = require_model(cfg.model_path(t60), "model").params;
    if (want_ft)
      b.params_ft =
          require_model(cfg.model_ft_path(t60), "fine-tuned model").params;
    b.sampler = cfg.scene_sampler(t60);
    bundles.push_back(std::move(b));
  }
  const ResultTable table = run_sweep(spec, bundles);
  const fs::path out =
      opt.out.empty() ? fs::path(cfg.paths.results) : fs::path(opt.out);
  write_csv(out, table);
  if (!cfg.paths.trials.empty()) write_trial_csv(cfg.paths.trials, table);

  for (Variant v : spec.variants) {
    double acc = 0.0;
    int n = 0;
    for (const auto& r : table.rows)
      if (r.variant == v) {
        acc += r.mean_ser_db;
        ++n;
      }
    std::cout << to_string(v) << ": mean SER " << num(acc / n) << " dB over "
              << n << " cells\n";
  }
  std::cout << table.rows.size() << " rows -> " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rtfvae: manifold-based enhancement of relative transfer "
               "functions"};
  app.require_subcommand(1);
  app.footer(config_reference());

  Options opt;
  std::uint64_t seed = 0;
  int (*handler)(const Options&) = nullptr;
  auto add = [&](const char* name, const char* help,
                 int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed-override", seed, "replace the global seed");
    sub->add_option("--out", opt.out,
                    "override the primary output path ({t60} expands)");
    sub->footer(config_reference());
    sub->callback([&, fn, sub] {
      if (sub->count("--seed-override")) opt.seed_override = seed;
      handler = fn;
    });
  };
  add("dataset", "build clean RTF datasets for every configured T60",
      cmd_dataset);
  add("train", "train the VAE on each dataset", cmd_train);
  add("finetune", "fine-tune trained models on noisy/clean RTF pairs",
      cmd_finetune);
  add("enhance", "enhance one noisy test scene and report every variant",
      cmd_enhance);
  add("sweep", "run the SNR / noise / T60 sweep and write the result CSV",
      cmd_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    return handler(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const MissingArtifact& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return kMissing;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
