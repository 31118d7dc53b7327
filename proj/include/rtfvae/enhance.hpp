// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "rtfvae/rtf.hpp"
#include "rtfvae/vae.hpp"

namespace rtfvae {

enum class Variant { Raw, Mean, Dn, Ls, Ft, Gt, FtGt };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
bool needs_finetuned(Variant v);

struct ObservationSet {
  SpectralFrames x1, x2;
};

/// Frame sums behind the least-squares cost, per bin:
///   a = sum_l |x1|^2, b = sum_l x2 conj(x1), c = sum_l |x2|^2.
struct LsStatistics {
  Vec a;
  CVec b;
  double c = 0.0;

  double reference_energy() const { return a.sum(); }
};

LsStatistics ls_statistics(const ObservationSet& obs);

struct EnhanceConfig {
  double alpha = 2.0;
  int iterations = 20;
};

void validate(const EnhanceConfig& cfg);

/// Encode the centered estimate, keep the posterior mean, decode, uncenter.
Vec denoise(const VaeParams<double>& params, const Vec& h_est,
            const Vec& mean_rtf);

/// Same pipeline applied to a ground-truth RTF (GT, or FT-GT with fine-tuned
/// parameters).
Vec gt_reconstruct(const VaeParams<double>& params, const Vec& h_true,
                   const Vec& mean_rtf);

/// sum_l |x1_l * h(z) - x2_l|^2 with h(z) = uncenter(decode(z)).
double ls_cost(const Vec& z, const LsStatistics& stats,
               const VaeParams<double>& params, const Vec& mean_rtf);
double ls_cost(const Vec& z, const ObservationSet& obs,
               const VaeParams<double>& params, const Vec& mean_rtf);

/// Gradient of ls_cost with respect to z by one reverse pass through the
/// decoder.
Vec ls_gradient(const Vec& z, const LsStatistics& stats,
                const VaeParams<double>& params, const Vec& mean_rtf);

struct LsResult {
  Vec rtf;
  Vec z;
  std::vector<double> cost;  // cost at every iterate, initial point included
};

/// Gradient descent on ls_cost from the encoder mean of h_est, with the step
/// normalized by the reference-channel energy.
LsResult ls_enhance(const VaeParams<double>& params, const Vec& h_est,
                    const LsStatistics& stats, const EnhanceConfig& cfg,
                    const Vec& mean_rtf);
LsResult ls_enhance(const VaeParams<double>& params, const Vec& h_est,
                    const ObservationSet& obs, const EnhanceConfig& cfg,
                    const Vec& mean_rtf);

Vec mean_baseline(const RtfDataset& ds);

}  // namespace rtfvae
