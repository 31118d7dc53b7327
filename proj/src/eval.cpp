// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rtfvae {

namespace {

constexpr double kSerCapDb = 150.0;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::uint64_t kind_index(NoiseKind k) { return static_cast<std::uint64_t>(k); }

}  // namespace

double ser_db(const Vec& truth, const Vec& estimate) {
  if (truth.size() != estimate.size()) throw Error("ser: length mismatch");
  const double signal = truth.squaredNorm();
  if (!(signal > 0.0)) throw Error("ser: zero-norm truth vector");
  const double error = (truth - estimate).squaredNorm();
  if (!std::isfinite(error)) throw NumericalError("ser: non-finite estimate");
  if (error < 1e-15 * signal) return kSerCapDb;
  return 10.0 * std::log10(signal / error);
}

double ser(const Mat& truth, const Mat& estimates) {
  if (truth.rows() != estimates.rows() || truth.cols() != estimates.cols())
    throw Error("ser: shape mismatch");
  if (truth.cols() < 1) throw Error("ser: empty set");
  double acc = 0.0;
  for (Index i = 0; i < truth.cols(); ++i)
    acc += ser_db(truth.col(i), estimates.col(i));
  return acc / static_cast<double>(truth.cols());
}

SceneComponents SceneSampler::sample(const Vec3& source, NoiseKind kind,
                                     std::uint64_t seed,
                                     const ImageSourceModel& model) const {
  SceneSpec spec = base;
  spec.source_pos = source;
  spec.noise_kind = kind;
  spec.seed = seed;
  spec.source_excitation = Excitation::Speechlike;
  spec.interferer_positions.clear();
  if (needs_interferers(kind)) {
    Rng rng(derive_seed(seed, 7));
    int count = 1;
    if (kind == NoiseKind::Babble || kind == NoiseKind::BabbleAndNoise) {
      std::uniform_int_distribution<int> dist(babble_min, babble_max);
      count = dist(rng);
    }
    const Vec3 array_center = 0.5 * (base.mic1_pos + base.mic2_pos);
    spec.interferer_positions =
        circle_positions(base.room_dims, array_center, count, rng);
  }
  return synthesize_components(spec, duration_s, model);
}

void validate(const SweepSpec& spec) {
  if (spec.snr_grid.empty() || spec.noise_kinds.empty() ||
      spec.t60_grid.empty() || spec.variants.empty())
    throw Error("sweep: grids must be nonempty");
  if (spec.trials < 1) throw Error("sweep: trials must be >= 1");
  for (double s : spec.snr_grid)
    if (std::isnan(s)) throw Error("sweep: SNR is NaN");
  validate(spec.enhance);
}

double ResultTable::at(double t60, NoiseKind kind, double snr,
                       Variant v) const {
  for (const auto& r : rows)
    if (r.t60_s == t60 && r.noise_kind == kind && r.snr_db == snr &&
        r.variant == v)
      return r.mean_ser_db;
  throw Error("result table: no row for t60=" + fmt("%g", t60) + " " +
              to_string(kind) + " snr=" + fmt("%g", snr) + " " + to_string(v));
}

ResultTable run_sweep(const SweepSpec& spec,
                      const std::vector<SweepBundle>& bundles) {
  validate(spec);
  bool want_ft = false;
  for (Variant v : spec.variants) want_ft |= needs_finetuned(v);

  ResultTable table;
  for (std::size_t ti = 0; ti < spec.t60_grid.size(); ++ti) {
    const double t60 = spec.t60_grid[ti];
    const SweepBundle* bundle = nullptr;
    for (const auto& b : bundles)
      if (b.t60 == t60) bundle = &b;
    if (!bundle) throw Error("sweep: no model/dataset for t60 " + fmt("%g", t60));
    if (want_ft && !bundle->params_ft)
      throw Error("sweep: fine-tuned parameters required for ft/ft_gt");
    const RtfDataset& ds = bundle->dataset;
    const Index n_test = ds.test.cols();
    if (n_test < 1 ||
        ds.test_positions.size() != static_cast<std::size_t>(n_test))
      throw Error("sweep: dataset lacks test RTFs with positions");

    SceneSpec base = bundle->sampler.base;
    const ImageSourceModel model =
        make_image_model(base.room_dims, t60, base.max_order);

    for (NoiseKind kind : spec.noise_kinds) {
      const std::size_t n_snr = spec.snr_grid.size();
      const std::size_t n_var = spec.variants.size();
      std::vector<double> sums(n_snr * n_var, 0.0);
      for (int trial = 0; trial < spec.trials; ++trial) {
        const Index pos = trial % n_test;
        const Vec truth = ds.test.col(pos);
        const SceneComponents sc = bundle->sampler.sample(
            ds.test_positions[static_cast<std::size_t>(pos)], kind,
            derive_seed(spec.seed, ti * 64 + kind_index(kind),
                        static_cast<std::uint64_t>(trial)),
            model);
        // Truth-only variants do not depend on the observation.
        const Vec gt = gt_reconstruct(bundle->params, truth, ds.mean_rtf);
        std::optional<Vec> ft_gt;
        if (bundle->params_ft)
          ft_gt = gt_reconstruct(*bundle->params_ft, truth, ds.mean_rtf);

        for (std::size_t si = 0; si < n_snr; ++si) {
          const MicObservation obs = sc.mix(spec.snr_grid[si]);
          const ObservationSet frames{stft(obs.x1), stft(obs.x2)};
          const Vec raw = estimate_rtf(frames.x1, frames.x2);
          for (std::size_t vi = 0; vi < n_var; ++vi) {
            Vec est;
            switch (spec.variants[vi]) {
              case Variant::Raw: est = raw; break;
              case Variant::Mean: est = mean_baseline(ds); break;
              case Variant::Dn:
                est = denoise(bundle->params, raw, ds.mean_rtf);
                break;
              case Variant::Ls:
                est = ls_enhance(bundle->params, raw, frames, spec.enhance,
                                 ds.mean_rtf)
                          .rtf;
                break;
              case Variant::Ft:
                est = denoise(*bundle->params_ft, raw, ds.mean_rtf);
                break;
              case Variant::Gt: est = gt; break;
              case Variant::FtGt: est = *ft_gt; break;
            }
            const double s = ser_db(truth, est);
            sums[si * n_var + vi] += s;
            table.trials.push_back(TrialRow{t60, kind, spec.snr_grid[si],
                                            spec.variants[vi], trial, s});
          }
        }
      }
      for (std::size_t si = 0; si < n_snr; ++si)
        for (std::size_t vi = 0; vi < n_var; ++vi)
          table.rows.push_back(ResultRow{
              t60, kind, spec.snr_grid[si], spec.variants[vi],
              sums[si * n_var + vi] / spec.trials, spec.trials, spec.seed});
    }
  }
  return table;
}

std::string format_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "t60_s,noise_kind,snr_db,variant,mean_ser_db,n_trials,seed\n";
  for (const auto& r : table.rows)
    os << fmt("%g", r.t60_s) << ',' << to_string(r.noise_kind) << ','
       << fmt("%g", r.snr_db) << ',' << to_string(r.variant) << ','
       << fmt("%.6f", r.mean_ser_db) << ',' << r.n_trials << ',' << r.seed
       << '\n';
  return os.str();
}

void write_csv(const std::filesystem::path& path, const ResultTable& table) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << format_csv(table);
}

void write_trial_csv(const std::filesystem::path& path,
                     const ResultTable& table) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "t60_s,noise_kind,snr_db,variant,trial_idx,ser_db\n";
  for (const auto& r : table.trials)
    os << fmt("%g", r.t60_s) << ',' << to_string(r.noise_kind) << ','
       << fmt("%g", r.snr_db) << ',' << to_string(r.variant) << ','
       << r.trial_idx << ',' << fmt("%.6f", r.ser_db) << '\n';
}

FineTunePairs make_finetune_pairs(const RtfDataset& ds,
                                  const SceneSampler& sampler,
                                  const ImageSourceModel& model,
                                  const std::vector<NoiseKind>& kinds,
                                  const std::vector<double>& snr_grid,
                                  std::uint64_t seed) {
  const Index n = ds.train_clean.cols();
  if (n < 1 || ds.train_positions.size() != static_cast<std::size_t>(n))
    throw Error("fine-tune pairs: dataset lacks training positions");
  if (kinds.empty() || snr_grid.empty())
    throw Error("fine-tune pairs: noise kinds and SNRs must be nonempty");
  const Index per_position =
      static_cast<Index>(kinds.size() * snr_grid.size());
  FineTunePairs out{Mat(ds.dim(), n * per_position),
                    Mat(ds.dim(), n * per_position)};
  Index col = 0;
  for (Index j = 0; j < n; ++j)
    for (NoiseKind kind : kinds) {
      const SceneComponents sc = sampler.sample(
          ds.train_positions[static_cast<std::size_t>(j)], kind,
          derive_seed(seed, 0xf7 + kind_index(kind),
                      static_cast<std::uint64_t>(j)),
          model);
      for (double snr : snr_grid) {
        const MicObservation obs = sc.mix(snr);
        out.noisy.col(col) = estimate_rtf(stft(obs.x1), stft(obs.x2));
        out.clean.col(col) = ds.train_clean.col(j);
        ++col;
      }
    }
  return out;
}

}  // namespace rtfvae
