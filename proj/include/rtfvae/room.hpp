// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rtfvae/common.hpp"
#include "rtfvae/signal.hpp"

namespace rtfvae {

/// Shoebox room with uniform, frequency-independent wall reflection.
struct ImageSourceModel {
  Vec3 dims{6.0, 6.0, 2.4};
  double reflection = 0.0;  // pressure reflection coefficient in [0, 1)
  int max_order = -1;       // total reflection order cap; -1 keeps every
                            // image that arrives within `length`
  Index length = 0;         // RIR taps
  int sample_rate = kSampleRate;
};

/// Sabine absorption 0.161 V / (S T60); may exceed 1 for short T60.
double sabine_absorption(const Vec3& dims, double t60);

/// Builds a model whose image-method energy decay reaches `t60`.
///
/// The reflection coefficient is first estimated from Sabine's formula and
/// then refined by bisection so that the T30 of the expected energy decay
/// curve matches the request. The RIR is truncated at 1.5 * t60.
ImageSourceModel make_image_model(const Vec3& dims, double t60,
                                  int max_order = -1,
                                  int sample_rate = kSampleRate);

/// T30-based reverberation time (seconds) from Schroeder backward
/// integration of an impulse response; fits the -5..-35 dB range.
double schroeder_t60(const Vec& rir, int sample_rate = kSampleRate,
                     double upper_db = -5.0, double lower_db = -35.0);

bool inside_room(const Vec3& dims, const Vec3& p);

Vec simulate_rir(const ImageSourceModel& model, const Vec3& src,
                 const Vec3& mic);
Vec simulate_rir(const Vec3& dims, double t60, const Vec3& src,
                 const Vec3& mic, int max_order = -1,
                 int sample_rate = kSampleRate);

struct RoomResponse {
  Vec rir1;
  Vec rir2;
  int sample_rate = kSampleRate;
};

RoomResponse simulate_pair(const ImageSourceModel& model, const Vec3& src,
                           const Vec3& mic1, const Vec3& mic2);

/// Retained-bin transfer-function ratio G2/G1, packed as [Re; Im].
///
/// Bin k (1..frame_len/2) of the STFT grid maps to bin k*fft_len/frame_len
/// of the fft_len-point DFT of each RIR.
Vec ground_truth_rtf(const RoomResponse& rr, int fft_len, int frame_len = 256);

// ---------------------------------------------------------------------------
// Scene synthesis

enum class NoiseKind { Awgn, PsWgn, PsSpeechlike, PsNoise, Babble, BabbleAndNoise };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);
bool needs_interferers(NoiseKind kind);

enum class Excitation { White, Speechlike, Noise };

/// Seeded excitation signals.
///   White      - unit-variance Gaussian noise.
///   Speechlike - white noise modulated by a positive 4 Hz low-pass envelope.
///   Noise      - stationary low-pass (AR(1), pole 0.9) noise, unit variance.
Vec make_excitation(Excitation kind, Index n, Rng& rng,
                    int sample_rate = kSampleRate);

struct SceneSpec {
  Vec3 room_dims{6.0, 6.0, 2.4};
  double t60 = 0.3;
  Vec3 source_pos{3.0, 2.0, 1.15};
  Vec3 mic1_pos{2.95, 4.0, 1.15};
  Vec3 mic2_pos{3.05, 4.0, 1.15};
  std::vector<Vec3> interferer_positions;
  NoiseKind noise_kind = NoiseKind::Awgn;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  Excitation source_excitation = Excitation::Speechlike;
  int max_order = -1;
};

void validate(const SceneSpec& spec);

struct MicObservation {
  TimeSignal x1, x2;  // mixtures
  TimeSignal c1, c2;  // spatial images of the source
  TimeSignal v1, v2;  // noise components
};

/// Clean images and unscaled noise of one scene; mixing at several SNRs
/// reuses the same realization.
struct SceneComponents {
  TimeSignal c1, c2;
  TimeSignal n1, n2;  // noise before SNR scaling

  MicObservation mix(double snr_db) const;
};

/// Gain g such that 10 log10(E[clean^2] / E[(g noise)^2]) = snr_db.
/// snr_db = +inf yields g = 0.
double mix_at_snr(const TimeSignal& clean_ref, const TimeSignal& noise_ref,
                  double snr_db);

/// `model` may be supplied to reuse a calibrated room for many scenes.
SceneComponents synthesize_components(
    const SceneSpec& spec, double duration_s,
    const std::optional<ImageSourceModel>& model = std::nullopt);
MicObservation synthesize_scene(
    const SceneSpec& spec, double duration_s,
    const std::optional<ImageSourceModel>& model = std::nullopt);

/// Interferer positions on a horizontal circle of radius min(dims)/2 - 0.5
/// around `center` at random angles.
std::vector<Vec3> circle_positions(const Vec3& dims, const Vec3& center,
                                   int count, Rng& rng);

}  // namespace rtfvae
