// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rtfvae {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      convert(j_.at(key), out);
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string& key = "") const {
    std::string p = path_;
    if (!key.empty()) p += (p.empty() ? "" : ".") + key;
    return p.empty() ? "config" : p;
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key()))
        throw ConfigError("unknown key '" + where(item.key()) + "'");
  }

 private:
  template <typename T>
  static void convert(const json& v, T& out) {
    out = v.get<T>();
  }
  static void convert(const json& v, Vec3& out) {
    const auto a = v.get<std::vector<double>>();
    if (a.size() != 3) throw ConfigError("expected 3 numbers");
    out = Vec3(a[0], a[1], a[2]);
  }
  static void convert(const json& v, std::array<int, 3>& out) {
    const auto a = v.get<std::vector<int>>();
    if (a.size() != 3) throw ConfigError("expected 3 integers");
    out = {a[0], a[1], a[2]};
  }
  static void convert(const json& v, std::vector<NoiseKind>& out) {
    out.clear();
    for (const auto& s : v.get<std::vector<std::string>>())
      out.push_back(noise_kind_from_string(s));
  }
  static void convert(const json& v, NoiseKind& out) {
    out = noise_kind_from_string(v.get<std::string>());
  }
  static void convert(const json& v, std::vector<Variant>& out) {
    out.clear();
    for (const auto& s : v.get<std::vector<std::string>>())
      out.push_back(variant_from_string(s));
  }
  static void convert(const json& v, std::vector<double>& out) {
    out = v.is_array() ? v.get<std::vector<double>>()
                       : std::vector<double>{v.get<double>()};
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void section(Reader& parent, const std::string& key, Fn&& fn) {
  if (const json* j = parent.child(key)) {
    Reader r(*j, parent.where(key));
    fn(r);
    r.finish();
  }
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void validate_config(const RunConfig& c) {
  require(!c.t60_grid.empty(), "room.t60: at least one value required");
  for (double t : c.t60_grid) require(t > 0.0, "room.t60: values must be > 0");
  try {
    SceneSpec s = c.room;
    s.noise_kind = NoiseKind::Awgn;
    for (double t : c.t60_grid) {
      s.t60 = t;
      validate(s);
    }
    validate(c.training);
    validate(c.enhance.cfg);
    validate(c.sweep_spec());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& p : make_grid(c.grid))
    require(inside_room(c.room.room_dims, p),
            "grid: position outside room");
  require(c.dataset.n_test >= 1 && c.dataset.n_val >= 1,
          "dataset: n_test and n_val must be >= 1");
  require(make_grid(c.grid).size() >
              static_cast<std::size_t>(c.dataset.n_test + c.dataset.n_val),
          "dataset: grid must hold more than n_test + n_val positions");
  require(c.dataset.duration_s >= 1.0, "dataset.duration_s must be >= 1");
  require(c.dataset.augment_repeats >= 1,
          "dataset.augment_repeats must be >= 1");
  require(c.dataset.noise_fraction > 0.0 && c.dataset.noise_fraction <= 1.0,
          "dataset.noise_fraction must be in (0, 1]");
  require(c.finetune.cfg.epochs >= 0, "finetune.epochs must be >= 0");
  require(c.finetune.cfg.lr > 0.0, "finetune.lr must be > 0");
  require(!c.finetune.noise_kinds.empty() && !c.finetune.snr_grid.empty(),
          "finetune: noise_kinds and snr_grid must be nonempty");
  require(c.sampler.duration_s >= 1.0, "sweep.duration_s must be >= 1");
  require(c.sampler.babble_min >= 1 &&
              c.sampler.babble_max >= c.sampler.babble_min,
          "sweep: need 1 <= babble_min <= babble_max");
  require(c.enhance.test_index >= 0 && c.enhance.test_index < c.dataset.n_test,
          "enhance.test_index must index the test split");
}

}  // namespace

std::string expand_t60(const std::string& pattern, double t60) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t60);
  std::string out = pattern;
  const std::string token = "{t60}";
  for (auto pos = out.find(token); pos != std::string::npos;
       pos = out.find(token, pos))
    out.replace(pos, token.size(), buf);
  return out;
}

DatasetConfig RunConfig::dataset_config(double t60) const {
  DatasetConfig d = dataset;
  d.room = room;
  d.room.t60 = t60;
  d.seed = derive_seed(seed, 1);
  return d;
}

TrainingConfig RunConfig::training_config() const {
  TrainingConfig t = training;
  t.seed = derive_seed(seed, 2);
  return t;
}

FineTuneConfig RunConfig::finetune_config() const {
  FineTuneConfig f = finetune.cfg;
  f.seed = derive_seed(seed, 3);
  return f;
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s = sweep;
  s.t60_grid = t60_grid;
  s.seed = seed;
  s.enhance = enhance.cfg;
  return s;
}

SceneSampler RunConfig::scene_sampler(double t60) const {
  SceneSampler s = sampler;
  s.base = room;
  s.base.t60 = t60;
  return s;
}

std::filesystem::path RunConfig::dataset_dir(double t60) const {
  return expand_t60(paths.dataset, t60);
}
std::filesystem::path RunConfig::model_path(double t60) const {
  return expand_t60(paths.model, t60);
}
std::filesystem::path RunConfig::model_ft_path(double t60) const {
  return expand_t60(paths.model_ft, t60);
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON at byte " + std::to_string(e.byte) +
                      ": " + e.what());
  }

  RunConfig c;
  Reader root(j, "");
  root.get("seed", c.seed);
  section(root, "room", [&](Reader& r) {
    r.get("dims", c.room.room_dims);
    r.get("t60", c.t60_grid);
    r.get("mic1", c.room.mic1_pos);
    r.get("mic2", c.room.mic2_pos);
    r.get("max_order", c.room.max_order);
  });
  section(root, "grid", [&](Reader& r) {
    r.get("center", c.grid.center);
    r.get("counts", c.grid.counts);
    r.get("spacing", c.grid.spacing);
  });
  section(root, "dataset", [&](Reader& r) {
    r.get("n_test", c.dataset.n_test);
    r.get("n_val", c.dataset.n_val);
    r.get("duration_s", c.dataset.duration_s);
    r.get("augment_repeats", c.dataset.augment_repeats);
    r.get("noise_fraction", c.dataset.noise_fraction);
  });
  section(root, "training", [&](Reader& r) {
    TrainingConfig& t = c.training;
    r.get("gamma", t.gamma);
    r.get("sigma_x_sq", t.sigma_x_sq);
    r.get("batch_size", t.batch_size);
    r.get("q", t.arch.latent);
    r.get("encoder_hidden", t.arch.encoder_hidden);
    r.get("decoder_hidden", t.arch.decoder_hidden);
    r.get("lr", t.lr);
    r.get("lr_drop_factor", t.lr_drop_factor);
    r.get("patience_lr", t.patience_lr);
    r.get("patience_stop", t.patience_stop);
    r.get("min_delta", t.min_delta);
    r.get("max_epochs", t.max_epochs);
    section(r, "adam", [&](Reader& a) {
      a.get("beta1", t.adam.beta1);
      a.get("beta2", t.adam.beta2);
      a.get("epsilon", t.adam.epsilon);
    });
  });
  section(root, "finetune", [&](Reader& r) {
    r.get("epochs", c.finetune.cfg.epochs);
    r.get("lr", c.finetune.cfg.lr);
    r.get("noise_kinds", c.finetune.noise_kinds);
    r.get("snr_grid", c.finetune.snr_grid);
  });
  section(root, "enhance", [&](Reader& r) {
    r.get("alpha", c.enhance.cfg.alpha);
    r.get("iterations", c.enhance.cfg.iterations);
    r.get("noise_kind", c.enhance.noise_kind);
    r.get("snr_db", c.enhance.snr_db);
    r.get("test_index", c.enhance.test_index);
  });
  section(root, "sweep", [&](Reader& r) {
    r.get("snr_grid", c.sweep.snr_grid);
    r.get("noise_kinds", c.sweep.noise_kinds);
    r.get("variants", c.sweep.variants);
    r.get("trials", c.sweep.trials);
    r.get("duration_s", c.sampler.duration_s);
    r.get("babble_min", c.sampler.babble_min);
    r.get("babble_max", c.sampler.babble_max);
  });
  section(root, "paths", [&](Reader& r) {
    r.get("dataset", c.paths.dataset);
    r.get("model", c.paths.model);
    r.get("model_ft", c.paths.model_ft);
    r.get("results", c.paths.results);
    r.get("trials", c.paths.trials);
  });
  root.finish();
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_reference() {
  return R"(Configuration keys (JSON; every key optional, defaults shown):
  seed                      global seed; stages derive their own streams [0]
  room.dims                 room size in m [6, 6, 2.4]
  room.t60                  reverberation time(s) in s, number or list [0.3]
  room.mic1, room.mic2      microphone positions in m
                            [2.95, 4, 1.15], [3.05, 4, 1.15]
  room.max_order            image order cap, -1 = all images within the
                            RIR length [-1]
  grid.center               source grid centre in m [3, 2, 1.15]
  grid.counts               positions along x, y, z [6, 5, 4]
  grid.spacing              spacing along x, y, z in m [0.04, 0.04, 0.08]
  dataset.n_test            test positions [10]
  dataset.n_val             validation positions [10]
  dataset.duration_s        white-noise duration per position [10]
  dataset.augment_repeats   copies of each training RTF [5]
  dataset.noise_fraction    augmentation noise / average RTF variance [0.01]
  training.gamma            reconstruction weight of the cost [0.95]
  training.sigma_x_sq       decoder variance, absorbed by gamma [0.5]
  training.batch_size       minibatch size [128]
  training.q                latent dimension [5]
  training.encoder_hidden   encoder widths [256, 128, 64]
  training.decoder_hidden   decoder widths [64, 128, 256]
  training.lr               initial Adam learning rate [0.001]
  training.lr_drop_factor   plateau divisor of the learning rate [5]
  training.patience_lr      epochs without improvement before a drop [5]
  training.patience_stop    epochs without improvement before stopping [10]
  training.min_delta        minimum validation improvement [0.001]
  training.max_epochs       epoch limit [500]
  training.adam.beta1/.beta2/.epsilon   [0.9, 0.999, 1e-8]
  finetune.epochs           fine-tuning epochs [15]
  finetune.lr               fine-tuning learning rate [0.0001]
  finetune.noise_kinds      noise kinds of the noisy/clean pairs ["babble"]
  finetune.snr_grid         SNRs of the pairs in dB [-10, -5, 0, 5, 10]
  enhance.alpha             latent least-squares step size [2]
  enhance.iterations        latent least-squares iterations [20]
  enhance.noise_kind        noise of the single-scene `enhance` run [babble]
  enhance.snr_db            SNR of the single-scene `enhance` run [10]
  enhance.test_index        test RTF used by `enhance` [0]
  sweep.snr_grid            SNRs in dB [-10, 0, 10, 20, 30]
  sweep.noise_kinds         awgn, ps_wgn, ps_speechlike, ps_noise, babble,
                            babble_and_noise ["babble"]
  sweep.variants            raw, mean, dn, ls, ft, gt, ft_gt
                            ["raw", "mean", "dn", "ls", "gt"]
  sweep.trials              trials per cell [50]
  sweep.duration_s          scene duration in s [10]
  sweep.babble_min/max      talkers in babble scenes [4, 8]
  paths.dataset             dataset directory ["out/dataset_t{t60}"]
  paths.model               model manifest ["out/model_t{t60}.json"]
  paths.model_ft            fine-tuned manifest ["out/model_ft_t{t60}.json"]
  paths.results             sweep CSV ["out/results.csv"]
  paths.trials              optional per-trial CSV [""]
  "{t60}" in paths expands to the reverberation time, e.g. 0.3.
)";
}

}  // namespace rtfvae
