// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "rtfvae/common.hpp"

namespace rtfvae {

struct TimeSignal {
  Vec samples;
  int sample_rate = kSampleRate;

  Index size() const { return samples.size(); }
  double energy() const { return samples.squaredNorm(); }
};

/// One-sided STFT with the DC bin split off.
///
/// `data` holds bins 1..frame_len/2 (K rows) for each of the L frames. The DC
/// coefficient of every frame is kept separately in `dc` so that synthesis
/// stays exact; all RTF processing works on `data` only.
struct SpectralFrames {
  CMat data;  // K x L
  Vec dc;     // L, may be empty (treated as zero)

  Index bins() const { return data.rows(); }
  Index frames() const { return data.cols(); }
};

/// Instantaneous auto- and cross-PSD per bin and frame.
///   auto_psd(k,l) = |x1(k,l)|^2
///   cross(k,l)    = x2(k,l) * conj(x1(k,l))
struct PsdSeries {
  Mat auto_psd;
  CMat cross;
};

enum class Window { SqrtHann, Rectangular };

struct StftConfig {
  int frame_len = 256;
  int hop = 128;
  Window window = Window::SqrtHann;
};

Vec make_window(Window kind, int frame_len);

SpectralFrames stft(const TimeSignal& x, const StftConfig& cfg = {});
inline SpectralFrames stft(const TimeSignal& x, int frame_len, int hop) {
  return stft(x, StftConfig{frame_len, hop, Window::SqrtHann});
}

/// Weighted overlap-add synthesis. Output length is (L-1)*hop + frame_len.
TimeSignal istft(const SpectralFrames& frames, const StftConfig& cfg = {},
                 int sample_rate = kSampleRate);
inline TimeSignal istft(const SpectralFrames& frames, int frame_len, int hop) {
  return istft(frames, StftConfig{frame_len, hop, Window::SqrtHann});
}

/// First and one-past-last sample index covered by frame_len/hop frames.
std::pair<Index, Index> fully_overlapped_range(Index num_frames,
                                               const StftConfig& cfg);

PsdSeries instantaneous_psd(const SpectralFrames& x1, const SpectralFrames& x2);

/// Linear convolution truncated to the length of `x`.
Vec convolve_same_length(const Vec& x, const Vec& h);

// File I/O. WAV is mono 16-bit PCM; the raw format is a little-endian uint64
// sample count followed by that many little-endian doubles.
void write_wav(const std::filesystem::path& path, const TimeSignal& x,
               double scale = 1.0);
TimeSignal read_wav(const std::filesystem::path& path);
void write_f64_signal(const std::filesystem::path& path, const TimeSignal& x);
TimeSignal read_f64_signal(const std::filesystem::path& path,
                           int sample_rate = kSampleRate);

}  // namespace rtfvae
