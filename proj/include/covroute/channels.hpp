#pragma once

#include <vector>

#include "covroute/random.hpp"

namespace covroute {

enum class GainKind { Constant, Rayleigh };

/// Statistics of one mode: how link gains are drawn and how noisy receivers are.
struct ModeChannel {
  GainKind kind = GainKind::Constant;
  double g0 = 1.0;                 // Constant only
  double friendly_noise_low = 1.0;  // U(low, high) per node
  double friendly_noise_high = 4.0;
  double adversary_noise = 1.0;
  /// When > 0, adversary gains are stored as Rician-uncertain with the sampled
  /// magnitude as known component and this per-axis error std.
  double adversary_sigma_err = 0.0;
};

struct ChannelSpec {
  std::vector<ModeChannel> modes;

  /// Mode 1 AWGN (unit gain), Mode 2 unit mean-square Rayleigh; friendly noise
  /// U(1,4), adversary noise 1 on both.
  static ChannelSpec two_mode_default();

  /// Throws InvalidArgument when any mode violates its invariants.
  void validate() const;
};

/// Constant: g0. Rayleigh: |h| with h ~ CN(0, 1).
double sample_gain(const ModeChannel& mode, RandomStream& rng);

/// Draw from U(low, high).
double sample_friendly_noise(const ModeChannel& mode, RandomStream& rng);

/// Amplitude of v + e_I + j e_Q with e_I, e_Q ~ N(0, sigma_err^2).
double sample_rician_amplitude(double v, double sigma_err, RandomStream& rng);

/// E[g^4] for the Rician-uncertain amplitude: 8 s^4 + 8 s^2 v^2 + v^4.
double fourth_moment_tau(double v, double sigma_err) noexcept;

}  // namespace covroute
