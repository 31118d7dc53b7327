// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <array>
#include <cmath>
#include <numbers>

#include "rtfvae/room.hpp"

namespace rtfvae {

namespace {

constexpr std::array<std::pair<NoiseKind, const char*>, 6> kNoiseNames{{
    {NoiseKind::Awgn, "awgn"},
    {NoiseKind::PsWgn, "ps_wgn"},
    {NoiseKind::PsSpeechlike, "ps_speechlike"},
    {NoiseKind::PsNoise, "ps_noise"},
    {NoiseKind::Babble, "babble"},
    {NoiseKind::BabbleAndNoise, "babble_and_noise"},
}};

// One-pole low-pass y[n] = (1-p) x[n] + p y[n-1], in place.
void one_pole(Vec& x, double pole) {
  double y = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    y = (1.0 - pole) * x[i] + pole * y;
    x[i] = y;
  }
}

Vec excitation_for_interferer(NoiseKind kind, Index index, Index n, Rng& rng,
                              int fs) {
  switch (kind) {
    case NoiseKind::PsWgn:
      return make_excitation(Excitation::White, n, rng, fs);
    case NoiseKind::PsSpeechlike:
    case NoiseKind::Babble:
      return make_excitation(Excitation::Speechlike, n, rng, fs);
    case NoiseKind::PsNoise:
      return make_excitation(Excitation::Noise, n, rng, fs);
    case NoiseKind::BabbleAndNoise:
      return make_excitation(
          index % 2 == 0 ? Excitation::Speechlike : Excitation::Noise, n, rng,
          fs);
    case NoiseKind::Awgn:
      break;
  }
  throw Error("noise kind has no interferer excitation");
}

}  // namespace

std::string to_string(NoiseKind kind) {
  for (const auto& [k, name] : kNoiseNames)
    if (k == kind) return name;
  throw Error("unknown noise kind");
}

NoiseKind noise_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kNoiseNames)
    if (name == n) return k;
  throw Error("unknown noise kind '" + name + "'");
}

bool needs_interferers(NoiseKind kind) { return kind != NoiseKind::Awgn; }

Vec make_excitation(Excitation kind, Index n, Rng& rng, int sample_rate) {
  if (n < 1) throw Error("make_excitation: length must be >= 1");
  switch (kind) {
    case Excitation::White:
      return gaussian_vector(n, rng);
    case Excitation::Speechlike: {
      Vec env = gaussian_vector(n, rng);
      const double pole =
          std::exp(-2.0 * std::numbers::pi * 4.0 / sample_rate);
      one_pole(env, pole);
      one_pole(env, pole);
      env = env.cwiseAbs();
      const double mean = env.mean();
      if (!(mean > 0.0)) throw Error("make_excitation: degenerate envelope");
      Vec out = (env / mean).cwiseProduct(gaussian_vector(n, rng));
      return out / std::sqrt(out.squaredNorm() / n);
    }
    case Excitation::Noise: {
      Vec out = gaussian_vector(n, rng);
      one_pole(out, 0.9);
      return out / std::sqrt(out.squaredNorm() / n);
    }
  }
  throw Error("unknown excitation");
}

void validate(const SceneSpec& spec) {
  if (!(spec.t60 > 0.0)) throw Error("scene: t60 must be > 0");
  if (!inside_room(spec.room_dims, spec.source_pos))
    throw Error("scene: source outside room");
  if (!inside_room(spec.room_dims, spec.mic1_pos) ||
      !inside_room(spec.room_dims, spec.mic2_pos))
    throw Error("scene: microphone outside room");
  if (spec.mic1_pos == spec.mic2_pos)
    throw Error("scene: microphones must not coincide");
  for (const auto& p : spec.interferer_positions)
    if (!inside_room(spec.room_dims, p))
      throw Error("scene: interferer outside room");
  if (needs_interferers(spec.noise_kind) && spec.interferer_positions.empty())
    throw Error("scene: noise kind " + to_string(spec.noise_kind) +
                " requires interferer positions");
}

double mix_at_snr(const TimeSignal& clean_ref, const TimeSignal& noise_ref,
                  double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (std::isnan(snr_db)) throw Error("mix_at_snr: snr is NaN");
  const double ec = clean_ref.energy();
  const double en = noise_ref.energy();
  if (!(en > 0.0)) throw Error("mix_at_snr: zero-energy noise");
  if (!(ec > 0.0)) throw Error("mix_at_snr: zero-energy clean signal");
  return std::sqrt(ec / en * std::pow(10.0, -snr_db / 10.0));
}

MicObservation SceneComponents::mix(double snr_db) const {
  MicObservation obs;
  obs.c1 = c1;
  obs.c2 = c2;
  const double g = mix_at_snr(c1, n1, snr_db);
  obs.v1 = TimeSignal{g * n1.samples, n1.sample_rate};
  obs.v2 = TimeSignal{g * n2.samples, n2.sample_rate};
  obs.x1 = TimeSignal{c1.samples + obs.v1.samples, c1.sample_rate};
  obs.x2 = TimeSignal{c2.samples + obs.v2.samples, c2.sample_rate};
  return obs;
}

SceneComponents synthesize_components(
    const SceneSpec& spec, double duration_s,
    const std::optional<ImageSourceModel>& model) {
  validate(spec);
  if (!(duration_s >= 1.0)) throw Error("scene: duration must be >= 1 s");
  const ImageSourceModel room =
      model ? *model : make_image_model(spec.room_dims, spec.t60, spec.max_order);
  if (model && model->dims != spec.room_dims)
    throw Error("scene: supplied room model does not match room_dims");
  const int fs = room.sample_rate;
  const auto n = static_cast<Index>(std::llround(duration_s * fs));

  SceneComponents out;
  Rng source_rng(derive_seed(spec.seed, 1));
  const Vec s = make_excitation(spec.source_excitation, n, source_rng, fs);
  const RoomResponse rr =
      simulate_pair(room, spec.source_pos, spec.mic1_pos, spec.mic2_pos);
  out.c1 = TimeSignal{convolve_same_length(s, rr.rir1), fs};
  out.c2 = TimeSignal{convolve_same_length(s, rr.rir2), fs};

  if (spec.noise_kind == NoiseKind::Awgn) {
    Rng noise_rng(derive_seed(spec.seed, 2));
    out.n1 = TimeSignal{gaussian_vector(n, noise_rng), fs};
    out.n2 = TimeSignal{gaussian_vector(n, noise_rng), fs};
    return out;
  }
  // Point-source kinds use the first position only; babble sums them all.
  const bool single = spec.noise_kind == NoiseKind::PsWgn ||
                      spec.noise_kind == NoiseKind::PsSpeechlike ||
                      spec.noise_kind == NoiseKind::PsNoise;
  const Index count =
      single ? 1 : static_cast<Index>(spec.interferer_positions.size());
  Vec v1 = Vec::Zero(n);
  Vec v2 = Vec::Zero(n);
  for (Index j = 0; j < count; ++j) {
    Rng rng(derive_seed(spec.seed, 2, static_cast<std::uint64_t>(j) + 1));
    const Vec e = excitation_for_interferer(spec.noise_kind, j, n, rng, fs);
    const RoomResponse ri = simulate_pair(
        room, spec.interferer_positions[static_cast<std::size_t>(j)],
        spec.mic1_pos, spec.mic2_pos);
    v1 += convolve_same_length(e, ri.rir1);
    v2 += convolve_same_length(e, ri.rir2);
  }
  out.n1 = TimeSignal{std::move(v1), fs};
  out.n2 = TimeSignal{std::move(v2), fs};
  return out;
}

MicObservation synthesize_scene(const SceneSpec& spec, double duration_s,
                                const std::optional<ImageSourceModel>& model) {
  return synthesize_components(spec, duration_s, model).mix(spec.snr_db);
}

std::vector<Vec3> circle_positions(const Vec3& dims, const Vec3& center,
                                   int count, Rng& rng) {
  if (count < 1) throw Error("circle_positions: count must be >= 1");
  const double radius = dims.minCoeff() / 2.0 - 0.5;
  if (!(radius > 0.0)) throw Error("circle_positions: room too small");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double a = angle(rng);
    Vec3 p = center + Vec3(radius * std::cos(a), radius * std::sin(a), 0.0);
    if (!inside_room(dims, p))
      throw Error("circle_positions: position outside room");
    out.push_back(p);
  }
  return out;
}

}  // namespace rtfvae
