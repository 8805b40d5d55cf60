#include "covroute/covert_metrics.hpp"

#include <cmath>
#include <string>

#include "covroute/channels.hpp"
#include "covroute/error.hpp"

namespace covroute {

namespace {

// Squared magnitude an adversary sees on one mode, as seen by the constraint.
double effective_squared_gain(const CsiEntry& entry, CsiVariant csi) {
  const double v = nominal_gain(entry);
  switch (csi) {
    case CsiVariant::Known:
      return v * v;
    case CsiVariant::LinearTau: {
      const double s = csi_sigma(entry);
      if (s == 0.0) return v * v;
      return std::sqrt(fourth_moment_tau(v, s));
    }
    case CsiVariant::SquaredTau:
      return fourth_moment_tau(v, csi_sigma(entry));
  }
  return v * v;
}

double adversary_term(const NetworkInstance& net, std::size_t src, std::size_t adv, int mode,
                      CsiVariant csi) {
  const double e = effective_squared_gain(net.adversary_gain(src, adv, mode), csi);
  const double path_loss = std::pow(net.adversary_distance(src, adv), net.alpha());
  return e / (net.adversary(adv).noise_var[mode] * path_loss);
}

LinkMetric metric_from_coefficients(NodeId src, NodeId dst, const std::vector<double>& a,
                                    const std::vector<double>& b, double free_cap) {
  LinkMetric metric;
  metric.src = src;
  metric.dst = dst;
  const std::size_t modes = a.size();
  metric.per_mode_coeff.assign(modes, 0.0);
  metric.free_mode_power.assign(modes, 0.0);

  double gamma = 0.0;
  for (std::size_t m = 0; m < modes; ++m) {
    if (b[m] > 0.0) {
      const double ratio = a[m] / b[m];
      gamma += ratio * ratio;
    } else if (a[m] > 0.0) {
      metric.free_mode_power[m] = free_cap;
    }
  }
  metric.gamma = gamma;
  if (gamma > 0.0) {
    const double root = std::sqrt(gamma);
    for (std::size_t m = 0; m < modes; ++m) {
      if (b[m] > 0.0) metric.per_mode_coeff[m] = a[m] / b[m] / b[m] / root;
    }
  }
  return metric;
}

void check_link(const NetworkInstance& net, NodeId src, NodeId dst) {
  if (src == dst) throw Error(ErrorCode::InvalidArgument, "link endpoints must differ");
  net.index_of(src);
  net.index_of(dst);
}

void check_adversary(const NetworkInstance& net, std::size_t willie) {
  if (willie >= net.adversary_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "adversary index " + std::to_string(willie) + " out of range");
  }
}

}  // namespace

bool LinkMetric::has_free_modes() const noexcept {
  for (double p : free_mode_power) {
    if (p > 0.0) return true;
  }
  return false;
}

double per_symbol_delta(double epsilon, std::int64_t n) {
  return CovertBudget::make(epsilon, n).delta;
}

std::vector<double> destination_coefficients(const NetworkInstance& net, NodeId src,
                                             NodeId dst) {
  const std::size_t s = net.index_of(src);
  const std::size_t d = net.index_of(dst);
  const double path_loss = std::pow(net.node_distance(s, d), net.alpha());
  std::vector<double> a(net.num_modes());
  for (int m = 0; m < net.num_modes(); ++m) {
    const double g = net.friendly_gain(s, d, m);
    a[m] = (g * g) / (net.node(d).noise_var[m] * path_loss);
  }
  return a;
}

std::vector<double> adversary_coefficients(const NetworkInstance& net, NodeId src,
                                           const MetricOptions& opts) {
  const std::size_t s = net.index_of(src);
  std::vector<double> b(net.num_modes(), 0.0);
  if (opts.adversary_mode == AdversaryMode::Single) {
    check_adversary(net, opts.willie);
    for (int m = 0; m < net.num_modes(); ++m) b[m] = adversary_term(net, s, opts.willie, m, opts.csi);
    return b;
  }
  if (net.adversary_count() == 0) {
    throw Error(ErrorCode::InvalidArgument, "network has no adversaries");
  }
  if (opts.csi != CsiVariant::Known && net.adversary_count() > 1 && !opts.extended) {
    throw Error(ErrorCode::InvalidArgument,
                "uncertain CSI with several adversaries requires the extended model");
  }
  for (int m = 0; m < net.num_modes(); ++m) {
    double sum = 0.0;
    for (std::size_t k = 0; k < net.adversary_count(); ++k) {
      sum += adversary_term(net, s, k, m, opts.csi);
    }
    b[m] = sum;
  }
  return b;
}

LinkMetric link_gamma_single(const NetworkInstance& net, NodeId src, NodeId dst,
                             std::size_t willie, double free_mode_power_cap) {
  MetricOptions opts;
  opts.adversary_mode = AdversaryMode::Single;
  opts.willie = willie;
  opts.free_mode_power_cap = free_mode_power_cap;
  return link_metric(net, src, dst, opts);
}

LinkMetric link_gamma_multi(const NetworkInstance& net, NodeId src, NodeId dst,
                            double free_mode_power_cap) {
  MetricOptions opts;
  opts.adversary_mode = AdversaryMode::Multi;
  opts.free_mode_power_cap = free_mode_power_cap;
  return link_metric(net, src, dst, opts);
}

LinkMetric link_gamma_uncertain(const NetworkInstance& net, NodeId src, NodeId dst,
                                std::size_t willie, CsiVariant variant,
                                double free_mode_power_cap) {
  if (variant == CsiVariant::Known) {
    throw Error(ErrorCode::InvalidArgument, "uncertain-CSI gamma needs a tau variant");
  }
  MetricOptions opts;
  opts.adversary_mode = AdversaryMode::Single;
  opts.willie = willie;
  opts.csi = variant;
  opts.free_mode_power_cap = free_mode_power_cap;
  return link_metric(net, src, dst, opts);
}

LinkMetric link_metric(const NetworkInstance& net, NodeId src, NodeId dst,
                       const MetricOptions& opts) {
  check_link(net, src, dst);
  if (!(opts.free_mode_power_cap >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "free-mode power cap must be >= 0");
  }
  return metric_from_coefficients(src, dst, destination_coefficients(net, src, dst),
                                  adversary_coefficients(net, src, opts),
                                  opts.free_mode_power_cap);
}

std::vector<double> optimal_mode_powers(const LinkMetric& metric, double delta_i) {
  if (!metric.usable()) {
    throw Error(ErrorCode::UnusableLink, "link " + std::to_string(metric.src) + "->" +
                                             std::to_string(metric.dst) + " has gamma = 0");
  }
  if (!(delta_i > 0.0)) throw Error(ErrorCode::UnusableLink, "link share must be positive");
  const double root = std::sqrt(delta_i);
  std::vector<double> powers(metric.per_mode_coeff.size());
  for (std::size_t m = 0; m < powers.size(); ++m) {
    powers[m] = metric.free_mode_power[m] > 0.0 ? metric.free_mode_power[m]
                                                : root * metric.per_mode_coeff[m];
  }
  return powers;
}

double link_capacity(double delta_i, double gamma) { return std::sqrt(delta_i * gamma); }

double path_capacity(double delta, std::span<const double> gammas) {
  if (gammas.empty()) throw Error(ErrorCode::InvalidArgument, "path has no links");
  double inverse_sum = 0.0;
  for (double g : gammas) {
    if (!(g > 0.0)) throw Error(ErrorCode::UnusableLink, "path contains a link with gamma = 0");
    inverse_sum += 1.0 / g;
  }
  return std::sqrt(delta / inverse_sum);
}

double allocate_delta(double path_cap, double gamma_i) {
  if (!(gamma_i > 0.0)) throw Error(ErrorCode::UnusableLink, "cannot allocate to gamma = 0");
  return path_cap * path_cap / gamma_i;
}

double covert_surrogate(const NetworkInstance& net, NodeId src, std::span<const double> powers,
                        const MetricOptions& opts) {
  const auto b = adversary_coefficients(net, src, opts);
  if (powers.size() != b.size()) {
    throw Error(ErrorCode::InvalidArgument, "power vector does not match the mode count");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < b.size(); ++m) {
    const double x = b[m] * powers[m];
    sum += x * x;
  }
  return sum;
}

double exact_gaussian_kl(double x) {
  if (!(x >= 0.0)) throw Error(ErrorCode::InvalidArgument, "SNR must be >= 0");
  if (x < 0.05) {
    // 1/2 sum_{k>=2} (-1)^k (k-1)/k x^k; the closed form cancels badly here.
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k < 24; ++k) {
      const double c = static_cast<double>(k - 1) / k;
      sum += (k % 2 == 0 ? c : -c) * term;
      term *= x;
    }
    return 0.5 * sum;
  }
  return 0.5 * (std::log1p(x) - x / (1.0 + x));
}

double exact_kl_at_adversary(const NetworkInstance& net, NodeId src,
                             std::span<const double> powers, std::size_t adversary,
                             CsiVariant csi) {
  check_adversary(net, adversary);
  const std::size_t s = net.index_of(src);
  if (powers.size() != static_cast<std::size_t>(net.num_modes())) {
    throw Error(ErrorCode::InvalidArgument, "power vector does not match the mode count");
  }
  double sum = 0.0;
  for (int m = 0; m < net.num_modes(); ++m) {
    sum += exact_gaussian_kl(adversary_term(net, s, adversary, m, csi) * powers[m]);
  }
  return sum;
}

double pinsker_bound(double divergence) {
  if (!(divergence >= 0.0)) throw Error(ErrorCode::InvalidArgument, "divergence must be >= 0");
  const double bound = 0.5 - 0.5 * std::sqrt(divergence / 2.0);
  return bound > 0.0 ? bound : 0.0;
}

double linearized_capacity(const NetworkInstance& net, NodeId src, NodeId dst,
                           std::span<const double> powers) {
  const auto a = destination_coefficients(net, src, dst);
  if (powers.size() != a.size()) {
    throw Error(ErrorCode::InvalidArgument, "power vector does not match the mode count");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) sum += a[m] * powers[m];
  return 0.5 * sum;
}

}  // namespace covroute
