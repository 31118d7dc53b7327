// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rtfvae/common.hpp"
#include "rtfvae/room.hpp"
#include "rtfvae/signal.hpp"

namespace rtfvae {

// An RTF vector has length D = 2K laid out as [Re h_1..Re h_K, Im h_1..Im h_K].
// Sets of RTFs are D x N matrices, one RTF per column.

Vec pack_rtf(const CVec& h);
CVec unpack_rtf(const Vec& packed);

/// Per-bin covariance-based estimate
///   h_k = (<P11 P12> - <P11><P12>) / (<P11^2> - <P11>^2 + 1e-12 <P11>^2)
/// where <.> averages over frames, P11 = |x1|^2 and P12 = x2 conj(x1).
/// Bins in which the reference channel is identically zero yield 0.
Vec estimate_rtf(const SpectralFrames& x1, const SpectralFrames& x2);
Vec estimate_rtf(const PsdSeries& psd);

Vec center(const Vec& v, const Vec& mean_rtf);
Vec uncenter(const Vec& v, const Vec& mean_rtf);
Mat center(const Mat& set, const Vec& mean_rtf);
Mat uncenter(const Mat& set, const Vec& mean_rtf);

/// Tiles every column `repeats` times (column j -> columns j*repeats ..) and
/// adds white Gaussian noise of variance noise_fraction times the average
/// per-element variance of `train`.
Mat augment(const Mat& train, int repeats, double noise_fraction,
            std::uint64_t seed);

/// Average over elements of the per-element variance across columns.
double average_element_variance(const Mat& set);

// ---------------------------------------------------------------------------
// Datasets

struct GridSpec {
  Vec3 center{3.0, 2.0, 1.15};
  std::array<int, 3> counts{6, 5, 4};
  Vec3 spacing{0.04, 0.04, 0.08};
};

/// Regular grid centred on spec.center; x varies fastest.
std::vector<Vec3> make_grid(const GridSpec& spec);

struct DatasetConfig {
  SceneSpec room;  // source_pos is overwritten per grid position
  int n_test = 10;
  int n_val = 10;
  double duration_s = 10.0;
  int augment_repeats = 5;
  double noise_fraction = 0.01;
  std::uint64_t seed = 0;
};

struct RtfDataset {
  Mat train;        // augmented training set
  Mat train_clean;  // pre-augmentation training set
  Mat validation;
  Mat test;
  Vec mean_rtf;  // mean of train_clean
  std::vector<Vec3> train_positions, validation_positions, test_positions;
  std::uint64_t seed = 0;
  double t60 = 0.0;

  Index dim() const { return mean_rtf.size(); }
};

/// Clean-condition RTF of one grid position: noiseless white source and
/// the covariance-based estimate from both microphone signals.
Vec clean_rtf(const SceneSpec& room, const Vec3& position, double duration_s,
              std::uint64_t seed, const ImageSourceModel& model);

RtfDataset build_dataset(const std::vector<Vec3>& grid,
                         const DatasetConfig& cfg);

void save_dataset(const RtfDataset& ds, const std::filesystem::path& dir);
RtfDataset load_dataset(const std::filesystem::path& dir);

/// Row-per-RTF little-endian doubles, D values per row.
void write_rtf_file(const std::filesystem::path& path, const Mat& set);
Mat read_rtf_file(const std::filesystem::path& path, Index dim);

}  // namespace rtfvae
