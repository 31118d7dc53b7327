// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/room.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace rtfvae {

namespace {

constexpr int kSincHalfWidth = 32;
constexpr double kPi = std::numbers::pi;
// Relative positions of the calibration source/receiver pair.
const Vec3 kReferenceSource(0.40, 0.35, 0.45);
const Vec3 kReferenceMic(0.65, 0.70, 0.55);

struct ImageVisitor {
  // Calls fn(order, distance) for every image source whose direct distance
  // to `mic` is shorter than `max_distance` and whose order is admissible.
  template <typename Fn>
  static void visit(const Vec3& dims, const Vec3& src, const Vec3& mic,
                    int max_order, double max_distance, Fn&& fn) {
    std::array<int, 3> bound{};
    for (int a = 0; a < 3; ++a) {
      int b = static_cast<int>(std::ceil(max_distance / (2.0 * dims[a]))) + 1;
      if (max_order >= 0) b = std::min(b, (max_order + 1) / 2 + 1);
      bound[a] = b;
    }
    const double max_d2 = max_distance * max_distance;
    for (int mx = -bound[0]; mx <= bound[0]; ++mx) {
      for (int qx = 0; qx < 2; ++qx) {
        const double dx = (1 - 2 * qx) * src[0] + 2 * mx * dims[0] - mic[0];
        const int ox = std::abs(mx - qx) + std::abs(mx);
        if (max_order >= 0 && ox > max_order) continue;
        if (dx * dx >= max_d2) continue;
        for (int my = -bound[1]; my <= bound[1]; ++my) {
          for (int qy = 0; qy < 2; ++qy) {
            const double dy = (1 - 2 * qy) * src[1] + 2 * my * dims[1] - mic[1];
            const int oy = std::abs(my - qy) + std::abs(my);
            if (max_order >= 0 && ox + oy > max_order) continue;
            const double dxy2 = dx * dx + dy * dy;
            if (dxy2 >= max_d2) continue;
            for (int mz = -bound[2]; mz <= bound[2]; ++mz) {
              for (int qz = 0; qz < 2; ++qz) {
                const double dz =
                    (1 - 2 * qz) * src[2] + 2 * mz * dims[2] - mic[2];
                const int order = ox + oy + std::abs(mz - qz) + std::abs(mz);
                if (max_order >= 0 && order > max_order) continue;
                const double d2 = dxy2 + dz * dz;
                if (d2 >= max_d2) continue;
                fn(order, std::sqrt(d2));
              }
            }
          }
        }
      }
    }
  }
};

double fit_decay_t60(const Vec& edc_db, int sample_rate, double upper_db,
                     double lower_db) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  Index count = 0;
  for (Index n = 0; n < edc_db.size(); ++n) {
    const double y = edc_db[n];
    if (y > upper_db) continue;
    if (y < lower_db) break;
    const double t = static_cast<double>(n) / sample_rate;
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double denom = count * sxx - sx * sx;
  if (denom <= 0) return 0.0;
  const double slope = (count * sxy - sx * sy) / denom;  // dB per second
  if (slope >= 0) return std::numeric_limits<double>::infinity();
  return -60.0 / slope;
}

Vec edc_db_from_energy(const Vec& energy) {
  Vec edc(energy.size());
  double acc = 0.0;
  for (Index n = energy.size() - 1; n >= 0; --n) {
    acc += energy[n];
    edc[n] = acc;
  }
  const double total = acc;
  for (Index n = 0; n < edc.size(); ++n)
    edc[n] = total > 0 && edc[n] > 0 ? 10.0 * std::log10(edc[n] / total)
                                     : -std::numeric_limits<double>::infinity();
  return edc;
}

// Energy arriving per (order, tap) for a reference source/receiver pair;
// the decay for reflection r is sum_o r^(2o) * hist(o, n).
class DecayHistogram {
 public:
  DecayHistogram(const Vec3& dims, int max_order, Index length,
                 int sample_rate)
      : length_(length) {
    const Vec3 src = dims.cwiseProduct(kReferenceSource);
    const Vec3 mic = dims.cwiseProduct(kReferenceMic);
    const double max_distance =
        kSpeedOfSound * static_cast<double>(length) / sample_rate;
    ImageVisitor::visit(dims, src, mic, max_order, max_distance,
                        [&](int order, double d) {
                          const auto tap = static_cast<Index>(std::lround(
                              d / kSpeedOfSound * sample_rate));
                          if (tap >= length_) return;
                          if (order >= static_cast<int>(rows_.size()))
                            rows_.resize(order + 1, Vec::Zero(length_));
                          const double a = 1.0 / (4.0 * kPi * d);
                          rows_[order][tap] += a * a;
                        });
  }

  double t60(double reflection, int sample_rate) const {
    return t60_at(reflection, sample_rate);
  }

  double t60_at(double reflection, int sample_rate) const {
    Vec energy = Vec::Zero(length_);
    double weight = 1.0;
    const double r2 = reflection * reflection;
    for (const auto& row : rows_) {
      energy += weight * row;
      weight *= r2;
    }
    return fit_decay_t60(edc_db_from_energy(energy), sample_rate, -5.0, -35.0);
  }

  // Bisection for the reflection coefficient whose decay matches t60.
  double solve(double t60, double guess, double hi, int sample_rate) const {
    double lo = 0.0;
    if (guess > 0.0 && guess < hi) {
      if (t60_at(guess, sample_rate) < t60)
        lo = guess;
      else
        hi = guess;
    }
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (t60_at(mid, sample_rate) < t60)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  Index length_;
  std::vector<Vec> rows_;
};

}  // namespace

double sabine_absorption(const Vec3& dims, double t60) {
  const double volume = dims.prod();
  const double surface =
      2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2]);
  return 24.0 * std::log(10.0) * volume / (kSpeedOfSound * surface * t60);
}

bool inside_room(const Vec3& dims, const Vec3& p) {
  return (p.array() > 0.0).all() && (p.array() < dims.array()).all();
}

ImageSourceModel make_image_model(const Vec3& dims, double t60, int max_order,
                                  int sample_rate) {
  if (!(dims.array() > 0.0).all()) throw Error("room dimensions must be > 0");
  if (!(t60 > 0.0) || !std::isfinite(t60)) throw Error("t60 must be > 0");
  if (sample_rate <= 0) throw Error("sample_rate must be > 0");

  ImageSourceModel model;
  model.dims = dims;
  model.max_order = max_order;
  model.sample_rate = sample_rate;
  // The small slack keeps e.g. 1.5 * 0.1 * 16000 at 2400 taps.
  model.length =
      static_cast<Index>(std::ceil(1.5 * t60 * sample_rate - 1e-9));
  if (max_order == 0) {
    model.reflection = 0.0;
    return model;
  }

  const DecayHistogram hist(dims, max_order, model.length, sample_rate);
  const double beta_max = 1.0 - 1e-9;
  if (hist.t60(beta_max, sample_rate) < t60)
    throw Error("t60 incompatible with geometry: reflection coefficient "
                "would have to be >= 1");
  const double alpha = sabine_absorption(dims, t60);
  // Sabine's estimate seeds the bracket when it is meaningful.
  const double seed_beta = alpha < 1.0 ? std::sqrt(1.0 - alpha) : -1.0;
  model.reflection = hist.solve(t60, seed_beta, beta_max, sample_rate);

  // The energy histogram ignores coherent overlap of neighbouring pulses,
  // which lengthens the decay of the rendered RIR. Rescale the histogram
  // target by the measured ratio until the reference RIR agrees.
  const Vec3 ref_src = dims.cwiseProduct(kReferenceSource);
  const Vec3 ref_mic = dims.cwiseProduct(kReferenceMic);
  double target = t60;
  for (int it = 0; it < 4; ++it) {
    const double measured =
        schroeder_t60(simulate_rir(model, ref_src, ref_mic), sample_rate);
    if (!(measured > 0.0) || !std::isfinite(measured)) break;
    if (std::abs(measured - t60) < 0.01 * t60) break;
    target *= t60 / measured;
    if (hist.t60(beta_max, sample_rate) < target) break;
    model.reflection = hist.solve(target, seed_beta, beta_max, sample_rate);
  }
  return model;
}

double schroeder_t60(const Vec& rir, int sample_rate, double upper_db,
                     double lower_db) {
  return fit_decay_t60(edc_db_from_energy(rir.cwiseAbs2()), sample_rate,
                       upper_db, lower_db);
}

Vec simulate_rir(const ImageSourceModel& model, const Vec3& src,
                 const Vec3& mic) {
  if (!inside_room(model.dims, src) || !inside_room(model.dims, mic))
    throw Error("simulate_rir: position outside room");
  if (model.reflection < 0.0 || model.reflection >= 1.0)
    throw Error("simulate_rir: reflection coefficient must be in [0, 1)");
  if (model.length < 1) throw Error("simulate_rir: empty RIR length");

  const double fs = model.sample_rate;
  const Index length = model.length;
  Vec h = Vec::Zero(length);
  const double max_distance =
      kSpeedOfSound * (static_cast<double>(length) + kSincHalfWidth) / fs;
  const Complex step = std::polar(1.0, kPi / kSincHalfWidth);

  ImageVisitor::visit(
      model.dims, src, mic, model.max_order, max_distance,
      [&](int order, double d) {
        const double gain = order == 0 ? 1.0 : std::pow(model.reflection, order);
        if (gain == 0.0) return;
        const double amp = gain / (4.0 * kPi * d);
        const double delay = d / kSpeedOfSound * fs;
        const auto first =
            static_cast<Index>(std::floor(delay)) - kSincHalfWidth + 1;
        // sin(pi (n - delay)) alternates sign with n; cos of the window
        // phase advances by a fixed rotation per tap.
        const double s0 = std::sin(kPi * (static_cast<double>(first) - delay));
        Complex rot = std::polar(1.0, kPi * (first - delay) / kSincHalfWidth);
        double sign = 1.0;
        for (int i = 0; i < 2 * kSincHalfWidth; ++i, sign = -sign, rot *= step) {
          const Index n = first + i;
          if (n < 0) continue;
          if (n >= length) break;
          const double x = static_cast<double>(n) - delay;
          if (std::abs(x) > kSincHalfWidth) continue;
          const double sinc = std::abs(x) < 1e-12 ? 1.0 : sign * s0 / (kPi * x);
          const double win = 0.5 * (1.0 + rot.real());
          h[n] += amp * sinc * win;
        }
      });
  return h;
}

Vec simulate_rir(const Vec3& dims, double t60, const Vec3& src,
                 const Vec3& mic, int max_order, int sample_rate) {
  if (!inside_room(dims, src) || !inside_room(dims, mic))
    throw Error("simulate_rir: position outside room");
  return simulate_rir(make_image_model(dims, t60, max_order, sample_rate), src,
                      mic);
}

RoomResponse simulate_pair(const ImageSourceModel& model, const Vec3& src,
                           const Vec3& mic1, const Vec3& mic2) {
  return RoomResponse{simulate_rir(model, src, mic1),
                      simulate_rir(model, src, mic2), model.sample_rate};
}

Vec ground_truth_rtf(const RoomResponse& rr, int fft_len, int frame_len) {
  if (frame_len <= 0 || frame_len % 2 != 0)
    throw Error("ground_truth_rtf: frame_len must be positive and even");
  if (fft_len < rr.rir1.size() || fft_len < rr.rir2.size())
    throw Error("ground_truth_rtf: fft_len shorter than RIR");
  if (fft_len % frame_len != 0)
    throw Error("ground_truth_rtf: fft_len must be a multiple of frame_len");
  if (rr.rir1.cwiseAbs().maxCoeff() == 0.0)
    throw Error("ground_truth_rtf: reference channel silent");

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  auto spectrum = [&](const Vec& rir) {
    std::vector<double> buf(fft_len, 0.0);
    std::copy(rir.data(), rir.data() + rir.size(), buf.begin());
    std::vector<Complex> out(fft_len / 2 + 1);
    fft.fwd(out.data(), buf.data(), fft_len);
    return out;
  };
  const auto g1 = spectrum(rr.rir1);
  const auto g2 = spectrum(rr.rir2);
  double peak = 0.0;
  for (const auto& v : g1) peak = std::max(peak, std::norm(v));
  const double eps = 1e-10 * peak;

  const int num_bins = frame_len / 2;
  const int stride = fft_len / frame_len;
  Vec packed(2 * num_bins);
  for (int k = 1; k <= num_bins; ++k) {
    const Complex a = g1[static_cast<std::size_t>(k * stride)];
    const Complex b = g2[static_cast<std::size_t>(k * stride)];
    const Complex h = b * std::conj(a) / (std::norm(a) + eps);
    packed[k - 1] = h.real();
    packed[num_bins + k - 1] = h.imag();
  }
  return packed;
}

}  // namespace rtfvae
