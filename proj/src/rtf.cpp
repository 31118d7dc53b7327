// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/rtf.hpp"

#include <cmath>

namespace rtfvae {

Vec pack_rtf(const CVec& h) {
  Vec out(2 * h.size());
  out.head(h.size()) = h.real();
  out.tail(h.size()) = h.imag();
  return out;
}

CVec unpack_rtf(const Vec& packed) {
  if (packed.size() % 2 != 0) throw Error("unpack_rtf: odd length");
  const Index k = packed.size() / 2;
  CVec h(k);
  h.real() = packed.head(k);
  h.imag() = packed.tail(k);
  return h;
}

Vec estimate_rtf(const PsdSeries& psd) {
  const Index num_bins = psd.auto_psd.rows();
  const Index num_frames = psd.auto_psd.cols();
  if (psd.cross.rows() != num_bins || psd.cross.cols() != num_frames)
    throw Error("estimate_rtf: shape mismatch");
  if (num_frames < 3) throw Error("estimate_rtf: insufficient frames");

  const double inv_l = 1.0 / static_cast<double>(num_frames);
  const Vec m11 = psd.auto_psd.rowwise().sum() * inv_l;
  const Vec m1111 = psd.auto_psd.cwiseAbs2().rowwise().sum() * inv_l;
  const CVec m12 = psd.cross.rowwise().sum() * inv_l;
  const CVec m1112 =
      (psd.cross.array() * psd.auto_psd.array().cast<Complex>())
          .matrix()
          .rowwise()
          .sum() *
      inv_l;

  CVec h(num_bins);
  for (Index k = 0; k < num_bins; ++k) {
    const double den = m1111[k] - m11[k] * m11[k] + 1e-12 * m11[k] * m11[k];
    h[k] = den > 0.0 ? (m1112[k] - m11[k] * m12[k]) / den : Complex{};
  }
  Vec out = pack_rtf(h);
  if (!out.allFinite()) throw NumericalError("estimate_rtf: non-finite result");
  return out;
}

Vec estimate_rtf(const SpectralFrames& x1, const SpectralFrames& x2) {
  return estimate_rtf(instantaneous_psd(x1, x2));
}

Vec center(const Vec& v, const Vec& mean_rtf) {
  if (v.size() != mean_rtf.size()) throw Error("center: length mismatch");
  return v - mean_rtf;
}

Vec uncenter(const Vec& v, const Vec& mean_rtf) {
  if (v.size() != mean_rtf.size()) throw Error("uncenter: length mismatch");
  return v + mean_rtf;
}

Mat center(const Mat& set, const Vec& mean_rtf) {
  if (set.rows() != mean_rtf.size()) throw Error("center: length mismatch");
  return set.colwise() - mean_rtf;
}

Mat uncenter(const Mat& set, const Vec& mean_rtf) {
  if (set.rows() != mean_rtf.size()) throw Error("uncenter: length mismatch");
  return set.colwise() + mean_rtf;
}

double average_element_variance(const Mat& set) {
  if (set.cols() < 1) throw Error("average_element_variance: empty set");
  const Vec mean = set.rowwise().mean();
  return (set.colwise() - mean).cwiseAbs2().mean();
}

Mat augment(const Mat& train, int repeats, double noise_fraction,
            std::uint64_t seed) {
  if (train.cols() < 1) throw Error("augment: empty training set");
  if (repeats < 1) throw Error("augment: repeats must be >= 1");
  if (!(noise_fraction > 0.0) || noise_fraction > 1.0)
    throw Error("augment: noise_fraction must be in (0, 1]");
  const double stddev =
      std::sqrt(noise_fraction * average_element_variance(train));
  Rng rng(derive_seed(seed, 0xa5));
  Mat out(train.rows(), train.cols() * repeats);
  for (Index j = 0; j < train.cols(); ++j)
    for (int r = 0; r < repeats; ++r)
      out.col(j * repeats + r) =
          stddev > 0.0
              ? Vec(train.col(j) + gaussian_vector(train.rows(), rng, stddev))
              : Vec(train.col(j));
  return out;
}

}  // namespace rtfvae
