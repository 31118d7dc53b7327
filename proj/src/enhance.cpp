// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "rtfvae/enhance.hpp"

#include <array>

namespace rtfvae {

namespace {

constexpr std::array<std::pair<Variant, const char*>, 7> kVariantNames{{
    {Variant::Raw, "raw"},
    {Variant::Mean, "mean"},
    {Variant::Dn, "dn"},
    {Variant::Ls, "ls"},
    {Variant::Ft, "ft"},
    {Variant::Gt, "gt"},
    {Variant::FtGt, "ft_gt"},
}};

Vec encoder_mean(const VaeParams<double>& params, const Vec& h,
                 const Vec& mean_rtf) {
  check_params(params);
  if (h.size() != params.dim())
    throw Error("enhance: RTF length does not match the model");
  const Mat x = center(h, mean_rtf);
  return encode(params, x).mu.col(0);
}

Vec decode_uncentered(const VaeParams<double>& params, const Vec& z,
                      const Vec& mean_rtf) {
  const Mat zm = z;
  return uncenter(Vec(decode(params, zm).col(0)), mean_rtf);
}

}  // namespace

std::string to_string(Variant v) {
  for (const auto& [k, name] : kVariantNames)
    if (k == v) return name;
  throw Error("unknown variant");
}

Variant variant_from_string(const std::string& name) {
  for (const auto& [k, n] : kVariantNames)
    if (name == n) return k;
  throw Error("unknown variant '" + name + "'");
}

bool needs_finetuned(Variant v) { return v == Variant::Ft || v == Variant::FtGt; }

LsStatistics ls_statistics(const ObservationSet& obs) {
  if (obs.x1.bins() != obs.x2.bins() || obs.x1.frames() != obs.x2.frames())
    throw Error("ls_statistics: shape mismatch");
  LsStatistics s;
  s.a = obs.x1.data.cwiseAbs2().rowwise().sum();
  s.b = obs.x2.data.cwiseProduct(obs.x1.data.conjugate()).rowwise().sum();
  s.c = obs.x2.data.cwiseAbs2().sum();
  return s;
}

void validate(const EnhanceConfig& cfg) {
  if (!(cfg.alpha >= 0.0)) throw Error("enhance: alpha must be >= 0");
  if (cfg.iterations < 0) throw Error("enhance: iterations must be >= 0");
}

Vec denoise(const VaeParams<double>& params, const Vec& h_est,
            const Vec& mean_rtf) {
  return decode_uncentered(params, encoder_mean(params, h_est, mean_rtf),
                           mean_rtf);
}

Vec gt_reconstruct(const VaeParams<double>& params, const Vec& h_true,
                   const Vec& mean_rtf) {
  return denoise(params, h_true, mean_rtf);
}

double ls_cost(const Vec& z, const LsStatistics& stats,
               const VaeParams<double>& params, const Vec& mean_rtf) {
  const Vec h = decode_uncentered(params, z, mean_rtf);
  const Index k = stats.a.size();
  if (h.size() != 2 * k) throw Error("ls_cost: bin count mismatch");
  const auto hr = h.head(k).array();
  const auto hi = h.tail(k).array();
  return (stats.a.array() * (hr.square() + hi.square()) -
          2.0 * (hr * stats.b.real().array() + hi * stats.b.imag().array()))
             .sum() +
         stats.c;
}

double ls_cost(const Vec& z, const ObservationSet& obs,
               const VaeParams<double>& params, const Vec& mean_rtf) {
  return ls_cost(z, ls_statistics(obs), params, mean_rtf);
}

Vec ls_gradient(const Vec& z, const LsStatistics& stats,
                const VaeParams<double>& params, const Vec& mean_rtf) {
  ForwardCache<double> cache;
  const Mat zm = z;
  const Vec h = uncenter(Vec(decode(params, zm, &cache).col(0)), mean_rtf);
  const Index k = stats.a.size();
  if (h.size() != 2 * k) throw Error("ls_gradient: bin count mismatch");
  Mat d_h(2 * k, 1);
  d_h.col(0).head(k) =
      2.0 * (stats.a.cwiseProduct(h.head(k)) - stats.b.real());
  d_h.col(0).tail(k) =
      2.0 * (stats.a.cwiseProduct(h.tail(k)) - stats.b.imag());
  Network<double> unused = params.decoder.zeros_like();
  return params.decoder.backward(cache, d_h, unused).col(0);
}

LsResult ls_enhance(const VaeParams<double>& params, const Vec& h_est,
                    const LsStatistics& stats, const EnhanceConfig& cfg,
                    const Vec& mean_rtf) {
  validate(cfg);
  const double energy = stats.reference_energy();
  if (!(energy > 0.0)) throw Error("ls_enhance: silent reference channel");
  LsResult out;
  out.z = encoder_mean(params, h_est, mean_rtf);
  out.cost.push_back(ls_cost(out.z, stats, params, mean_rtf));
  const double step = cfg.alpha / energy;
  for (int it = 0; it < cfg.iterations; ++it) {
    out.z -= step * ls_gradient(out.z, stats, params, mean_rtf);
    if (!out.z.allFinite()) throw NumericalError("ls_enhance: diverged");
    out.cost.push_back(ls_cost(out.z, stats, params, mean_rtf));
  }
  out.rtf = decode_uncentered(params, out.z, mean_rtf);
  return out;
}

LsResult ls_enhance(const VaeParams<double>& params, const Vec& h_est,
                    const ObservationSet& obs, const EnhanceConfig& cfg,
                    const Vec& mean_rtf) {
  return ls_enhance(params, h_est, ls_statistics(obs), cfg, mean_rtf);
}

Vec mean_baseline(const RtfDataset& ds) {
  if (ds.mean_rtf.size() == 0) throw Error("mean_baseline: dataset not built");
  return ds.mean_rtf;
}

}  // namespace rtfvae
