#include "covroute/channels.hpp"

#include <cmath>
#include <random>
#include <string>

#include "covroute/error.hpp"

namespace covroute {

ChannelSpec ChannelSpec::two_mode_default() {
  ModeChannel awgn;
  awgn.kind = GainKind::Constant;
  awgn.g0 = 1.0;
  ModeChannel fading;
  fading.kind = GainKind::Rayleigh;
  return ChannelSpec{{awgn, fading}};
}

void ChannelSpec::validate() const {
  if (modes.empty()) throw Error(ErrorCode::InvalidArgument, "channel spec has no modes");
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const auto& c = modes[m];
    const std::string where = "channel mode " + std::to_string(m + 1) + ": ";
    if (!(c.g0 >= 0.0) || !std::isfinite(c.g0)) {
      throw Error(ErrorCode::InvalidArgument, where + "g0 must be >= 0");
    }
    if (!(c.friendly_noise_low > 0.0) || !(c.friendly_noise_low <= c.friendly_noise_high) ||
        !std::isfinite(c.friendly_noise_high)) {
      throw Error(ErrorCode::InvalidArgument, where + "noise range needs 0 < low <= high");
    }
    if (!(c.adversary_noise > 0.0) || !std::isfinite(c.adversary_noise)) {
      throw Error(ErrorCode::InvalidArgument, where + "adversary noise must be > 0");
    }
    if (!(c.adversary_sigma_err >= 0.0) || !std::isfinite(c.adversary_sigma_err)) {
      throw Error(ErrorCode::InvalidArgument, where + "adversary sigma_err must be >= 0");
    }
  }
}

double sample_gain(const ModeChannel& mode, RandomStream& rng) {
  if (mode.kind == GainKind::Constant) return mode.g0;
  // Unit mean-square: each quadrature component has variance 1/2.
  std::normal_distribution<double> component(0.0, std::sqrt(0.5));
  const double re = component(rng);
  const double im = component(rng);
  return std::hypot(re, im);
}

double sample_friendly_noise(const ModeChannel& mode, RandomStream& rng) {
  if (mode.friendly_noise_low == mode.friendly_noise_high) return mode.friendly_noise_low;
  return mode.friendly_noise_low +
         (mode.friendly_noise_high - mode.friendly_noise_low) * rng.uniform01();
}

double sample_rician_amplitude(double v, double sigma_err, RandomStream& rng) {
  if (sigma_err == 0.0) return v;
  std::normal_distribution<double> err(0.0, sigma_err);
  const double re = v + err(rng);
  const double im = err(rng);
  return std::hypot(re, im);
}

double fourth_moment_tau(double v, double sigma_err) noexcept {
  const double s2 = sigma_err * sigma_err;
  const double v2 = v * v;
  return 8.0 * s2 * s2 + 8.0 * s2 * v2 + v2 * v2;
}

}  // namespace covroute
