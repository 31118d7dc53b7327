// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rtfvae/enhance.hpp"
#include "rtfvae/room.hpp"
#include "rtfvae/rtf.hpp"
#include "rtfvae/vae.hpp"

namespace rtfvae {

/// Signal-to-error ratio in dB of a single estimate; error energies below
/// 1e-15 |h|^2 count as 150 dB.
double ser_db(const Vec& truth, const Vec& estimate);

/// Mean of ser_db over the columns of two equally shaped sets.
double ser(const Mat& truth, const Mat& estimates);

/// Microphone signals for one trial at a test position; the components are
/// shared by every SNR of the sweep.
struct SceneSampler {
  SceneSpec base;  // room, mics, t60, max_order
  double duration_s = 10.0;
  int babble_min = 4;
  int babble_max = 8;

  SceneComponents sample(const Vec3& source, NoiseKind kind,
                         std::uint64_t seed,
                         const ImageSourceModel& model) const;
};

struct SweepSpec {
  std::vector<double> snr_grid{-10, 0, 10, 20, 30};
  std::vector<NoiseKind> noise_kinds{NoiseKind::Babble};
  std::vector<double> t60_grid{0.1, 0.3, 0.6};
  std::vector<Variant> variants{Variant::Raw, Variant::Mean, Variant::Dn,
                                Variant::Ls, Variant::Gt};
  int trials = 50;
  std::uint64_t seed = 0;
  EnhanceConfig enhance;
};

void validate(const SweepSpec& spec);

/// Everything a sweep needs for one reverberation time.
struct SweepBundle {
  double t60 = 0.0;
  RtfDataset dataset;
  VaeParams<double> params;
  std::optional<VaeParams<double>> params_ft;
  SceneSampler sampler;
};

struct ResultRow {
  double t60_s = 0.0;
  NoiseKind noise_kind = NoiseKind::Awgn;
  double snr_db = 0.0;
  Variant variant = Variant::Raw;
  double mean_ser_db = 0.0;
  int n_trials = 0;
  std::uint64_t seed = 0;
};

struct TrialRow {
  double t60_s = 0.0;
  NoiseKind noise_kind = NoiseKind::Awgn;
  double snr_db = 0.0;
  Variant variant = Variant::Raw;
  int trial_idx = 0;
  double ser_db = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<TrialRow> trials;

  /// Mean SER of one cell; throws if absent.
  double at(double t60, NoiseKind kind, double snr, Variant v) const;
};

/// Rows ordered by t60, noise kind, SNR, then variant (spec order). Bundles
/// are matched to spec.t60_grid by t60.
ResultTable run_sweep(const SweepSpec& spec,
                      const std::vector<SweepBundle>& bundles);

void write_csv(const std::filesystem::path& path, const ResultTable& table);
void write_trial_csv(const std::filesystem::path& path,
                     const ResultTable& table);
std::string format_csv(const ResultTable& table);

/// Noisy estimates and their clean dataset RTFs at training positions, one
/// pair per (position, noise kind, SNR).
struct FineTunePairs {
  Mat noisy;
  Mat clean;
};

FineTunePairs make_finetune_pairs(const RtfDataset& ds,
                                  const SceneSampler& sampler,
                                  const ImageSourceModel& model,
                                  const std::vector<NoiseKind>& kinds,
                                  const std::vector<double>& snr_grid,
                                  std::uint64_t seed);

}  // namespace rtfvae
