// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/signal.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

namespace rtfvae {

namespace {

void check_stft_config(const StftConfig& cfg) {
  if (cfg.frame_len <= 0 || cfg.frame_len % 2 != 0)
    throw Error("stft: frame_len must be positive and even");
  if (cfg.hop <= 0 || cfg.hop > cfg.frame_len)
    throw Error("stft: hop must satisfy 0 < hop <= frame_len");
}

}  // namespace

Vec make_window(Window kind, int frame_len) {
  Vec w(frame_len);
  if (kind == Window::Rectangular) {
    w.setOnes();
    return w;
  }
  // Periodic Hann: squared window sums to one at 50% overlap.
  for (int n = 0; n < frame_len; ++n) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / frame_len);
    w[n] = std::sqrt(hann);
  }
  return w;
}

SpectralFrames stft(const TimeSignal& x, const StftConfig& cfg) {
  check_stft_config(cfg);
  if (x.size() < cfg.frame_len) throw Error("stft: insufficient samples");
  if (!x.samples.allFinite()) throw Error("stft: non-finite samples");

  const Index n = cfg.frame_len;
  const Index num_bins = n / 2;
  const Index num_frames = (x.size() - n) / cfg.hop + 1;
  const Vec window = make_window(cfg.window, cfg.frame_len);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(n);
  std::vector<Complex> spectrum(num_bins + 1);

  SpectralFrames out;
  out.data.resize(num_bins, num_frames);
  out.dc.resize(num_frames);
  for (Index l = 0; l < num_frames; ++l) {
    const Index start = l * cfg.hop;
    for (Index i = 0; i < n; ++i) frame[i] = window[i] * x.samples[start + i];
    fft.fwd(spectrum.data(), frame.data(), n);
    out.dc[l] = spectrum[0].real();
    for (Index k = 0; k < num_bins; ++k) out.data(k, l) = spectrum[k + 1];
  }
  return out;
}

TimeSignal istft(const SpectralFrames& frames, const StftConfig& cfg,
                 int sample_rate) {
  check_stft_config(cfg);
  const Index n = cfg.frame_len;
  const Index num_bins = n / 2;
  if (frames.bins() != num_bins)
    throw Error("istft: bin count does not match frame_len/2");
  if (frames.frames() < 1) throw Error("istft: no frames");
  if (frames.dc.size() != 0 && frames.dc.size() != frames.frames())
    throw Error("istft: dc length does not match frame count");

  const Index num_frames = frames.frames();
  const Vec window = make_window(cfg.window, cfg.frame_len);

  // Normalize by the summed squared window so synthesis is exact wherever
  // the overlap-added window energy is nonzero.
  const Index length = (num_frames - 1) * cfg.hop + n;
  Vec out = Vec::Zero(length);
  Vec norm = Vec::Zero(length);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<Complex> spectrum(num_bins + 1);
  std::vector<double> frame(n);
  for (Index l = 0; l < num_frames; ++l) {
    spectrum[0] = frames.dc.size() ? Complex(frames.dc[l], 0.0) : Complex{};
    for (Index k = 0; k < num_bins; ++k) spectrum[k + 1] = frames.data(k, l);
    // Nyquist coefficient of a real frame is real.
    spectrum[num_bins] = Complex(spectrum[num_bins].real(), 0.0);
    fft.inv(frame.data(), spectrum.data(), n);
    const Index start = l * cfg.hop;
    for (Index i = 0; i < n; ++i) {
      out[start + i] += window[i] * frame[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  for (Index i = 0; i < length; ++i)
    if (norm[i] > 1e-12) out[i] /= norm[i];
  return TimeSignal{std::move(out), sample_rate};
}

std::pair<Index, Index> fully_overlapped_range(Index num_frames,
                                               const StftConfig& cfg) {
  const Index first = cfg.frame_len - cfg.hop;
  const Index last = (num_frames - 1) * cfg.hop + cfg.hop;
  return {first, std::max(first, last)};
}

PsdSeries instantaneous_psd(const SpectralFrames& x1,
                            const SpectralFrames& x2) {
  if (x1.bins() != x2.bins() || x1.frames() != x2.frames())
    throw Error("instantaneous_psd: shape mismatch");
  PsdSeries psd;
  psd.auto_psd = x1.data.cwiseAbs2();
  psd.cross = x2.data.cwiseProduct(x1.data.conjugate());
  return psd;
}

Vec convolve_same_length(const Vec& x, const Vec& h) {
  const Index n = x.size();
  const Index m = h.size();
  if (n == 0 || m == 0) return Vec::Zero(n);
  if (m <= 64) {
    Vec y = Vec::Zero(n);
    for (Index i = 0; i < n; ++i) {
      const Index kmax = std::min<Index>(m - 1, i);
      double acc = 0.0;
      for (Index k = 0; k <= kmax; ++k) acc += h[k] * x[i - k];
      y[i] = acc;
    }
    return y;
  }

  // Overlap-add with a power-of-two block sized to the filter.
  Index nfft = 1;
  while (nfft < 2 * m) nfft <<= 1;
  nfft = std::max<Index>(nfft, 4096);
  const Index block = nfft - m + 1;

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buf(nfft, 0.0);
  std::vector<Complex> filter_spec(nfft / 2 + 1), spec(nfft / 2 + 1);
  std::copy(h.data(), h.data() + m, buf.begin());
  fft.fwd(filter_spec.data(), buf.data(), nfft);

  Vec y = Vec::Zero(n);
  for (Index start = 0; start < n; start += block) {
    const Index len = std::min(block, n - start);
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy(x.data() + start, x.data() + start + len, buf.begin());
    fft.fwd(spec.data(), buf.data(), nfft);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= filter_spec[k];
    fft.inv(buf.data(), spec.data(), nfft);
    const Index out_len = std::min<Index>(len + m - 1, n - start);
    for (Index i = 0; i < out_len; ++i) y[start + i] += buf[i];
  }
  return y;
}

}  // namespace rtfvae
