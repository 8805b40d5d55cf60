#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "covroute/covert_budget.hpp"
#include "covroute/model.hpp"

namespace covroute {

/// Selects which adversary/CSI model a link is scored against.
struct MetricOptions {
  AdversaryMode adversary_mode = AdversaryMode::Multi;
  CsiVariant csi = CsiVariant::Known;
  /// Adversary index used in Single mode.
  std::size_t willie = 0;
  /// Allows uncertain CSI together with more than one adversary.
  bool extended = false;
  /// Power put on a mode that no adversary can observe.
  double free_mode_power_cap = 1.0;
};

/// Link figure of merit. Constrained powers are sqrt(delta_i) * per_mode_coeff;
/// modes invisible to every adversary carry free_mode_power instead and are
/// excluded from gamma.
struct LinkMetric {
  NodeId src = 0;
  NodeId dst = 0;
  double gamma = 0.0;
  std::vector<double> per_mode_coeff;
  std::vector<double> free_mode_power;

  bool usable() const noexcept { return gamma > 0.0; }
  bool has_free_modes() const noexcept;
};

/// delta = epsilon / n. Throws NonPositiveBudget.
double per_symbol_delta(double epsilon, std::int64_t n);

/// a_m = g_SD^2 / (sigma_D^2 d_SD^alpha): receiver SNR per unit power.
std::vector<double> destination_coefficients(const NetworkInstance& net, NodeId src, NodeId dst);

/// B_m: adversary SNR per unit power under the selected model. For several
/// adversaries the per-adversary values are summed; for uncertain CSI the
/// squared gain is replaced by sqrt(tau) (linear-tau) or tau (squared-tau).
std::vector<double> adversary_coefficients(const NetworkInstance& net, NodeId src,
                                           const MetricOptions& opts);

LinkMetric link_gamma_single(const NetworkInstance& net, NodeId src, NodeId dst,
                             std::size_t willie, double free_mode_power_cap = 1.0);
LinkMetric link_gamma_multi(const NetworkInstance& net, NodeId src, NodeId dst,
                            double free_mode_power_cap = 1.0);
/// variant must be LinearTau or SquaredTau.
LinkMetric link_gamma_uncertain(const NetworkInstance& net, NodeId src, NodeId dst,
                                std::size_t willie, CsiVariant variant,
                                double free_mode_power_cap = 1.0);

/// Dispatches on opts to one of the gamma variants above.
LinkMetric link_metric(const NetworkInstance& net, NodeId src, NodeId dst,
                       const MetricOptions& opts);

/// Throws UnusableLink when gamma == 0 or delta_i <= 0.
std::vector<double> optimal_mode_powers(const LinkMetric& metric, double delta_i);

/// sqrt(delta_i * gamma).
double link_capacity(double delta_i, double gamma);

/// sqrt(delta / sum 1/gamma_i). Throws UnusableLink if any gamma is zero.
double path_capacity(double delta, std::span<const double> gammas);

/// delta_i = C^2 / gamma_i, the share that gives link i capacity C.
double allocate_delta(double path_cap, double gamma_i);

/// Left-hand side of the covertness constraint: sum_m (B_m P_m)^2.
double covert_surrogate(const NetworkInstance& net, NodeId src, std::span<const double> powers,
                        const MetricOptions& opts);

/// Per-symbol KL between N(0, 1) and N(0, 1 + x), x the adversary SNR.
double exact_gaussian_kl(double x);

/// Exact per-symbol KL summed over modes as seen by one adversary.
double exact_kl_at_adversary(const NetworkInstance& net, NodeId src,
                             std::span<const double> powers, std::size_t adversary,
                             CsiVariant csi);

/// Lower bound on the adversary's detection error: max(0, 1/2 - 1/2 sqrt(D/2)).
double pinsker_bound(double divergence);

/// Linearized sum rate sum_m a_m P_m / 2. At the optimal powers this is half
/// of link_capacity, which drops the 1/2.
double linearized_capacity(const NetworkInstance& net, NodeId src, NodeId dst,
                           std::span<const double> powers);

}  // namespace covroute
