#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

#include "covroute/covert_budget.hpp"

namespace covroute {

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

/// Euclidean distance in grid units.
double distance(Position a, Position b) noexcept;

using NodeId = int;

struct FriendlyNode {
  NodeId id = 0;
  Position pos;
  std::vector<double> noise_var;  // per mode
};

struct Adversary {
  NodeId id = 0;
  Position pos;
  std::vector<double> noise_var;  // per mode
};

/// Gain magnitude known exactly at planning time.
struct KnownGain {
  double g = 0.0;
};

/// Gain whose known component v sits on one quadrature axis, with Gaussian
/// estimation error of standard deviation sigma_err on each axis.
struct RicianGain {
  double v = 0.0;
  double sigma_err = 0.0;
};

using CsiEntry = std::variant<KnownGain, RicianGain>;

/// Magnitude used when the entry is treated as exactly known (v for Rician).
double nominal_gain(const CsiEntry& entry) noexcept;
/// Estimation error std; zero for KnownGain.
double csi_sigma(const CsiEntry& entry) noexcept;

/// Sparse gain description keyed by (src id, dst/adversary id, mode index).
/// Mode indices are zero-based here; file formats use 1-based modes.
class GainTable {
 public:
  using Key = std::tuple<NodeId, NodeId, int>;

  void set_friendly(NodeId src, NodeId dst, int mode, double g);
  void set_adversary(NodeId src, NodeId adv, int mode, CsiEntry entry);

  const std::map<Key, double>& friendly() const noexcept { return friendly_; }
  const std::map<Key, CsiEntry>& adversary() const noexcept { return adversary_; }

 private:
  std::map<Key, double> friendly_;
  std::map<Key, CsiEntry> adversary_;
};

/// Validated, immutable network. Gains are stored densely by node index.
class NetworkInstance {
 public:
  static NetworkInstance build(std::vector<FriendlyNode> nodes,
                               std::vector<Adversary> adversaries, const GainTable& gains,
                               double alpha, NodeId source, NodeId dest);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t adversary_count() const noexcept { return adversaries_.size(); }
  int num_modes() const noexcept { return num_modes_; }
  double alpha() const noexcept { return alpha_; }

  const std::vector<FriendlyNode>& nodes() const noexcept { return nodes_; }
  const std::vector<Adversary>& adversaries() const noexcept { return adversaries_; }
  const FriendlyNode& node(std::size_t index) const { return nodes_.at(index); }
  const Adversary& adversary(std::size_t index) const { return adversaries_.at(index); }

  NodeId source() const noexcept { return nodes_[source_index_].id; }
  NodeId dest() const noexcept { return nodes_[dest_index_].id; }
  std::size_t source_index() const noexcept { return source_index_; }
  std::size_t dest_index() const noexcept { return dest_index_; }

  /// Index of a friendly node id; throws InvalidArgument if unknown.
  std::size_t index_of(NodeId id) const;
  std::optional<std::size_t> find_index(NodeId id) const;

  double friendly_gain(std::size_t src, std::size_t dst, int mode) const {
    return friendly_gains_[(src * nodes_.size() + dst) * num_modes_ + mode];
  }
  const CsiEntry& adversary_gain(std::size_t src, std::size_t adv, int mode) const {
    return adversary_gains_[(src * adversaries_.size() + adv) * num_modes_ + mode];
  }

  double node_distance(std::size_t a, std::size_t b) const {
    return distance(nodes_[a].pos, nodes_[b].pos);
  }
  double adversary_distance(std::size_t node, std::size_t adv) const {
    return distance(nodes_[node].pos, adversaries_[adv].pos);
  }

  /// Copy with the friendly gains of every mode except `keep_mode` set to zero.
  NetworkInstance restricted_to_mode(int keep_mode) const;
  /// Copy with a different path-loss exponent.
  NetworkInstance with_alpha(double alpha) const;

  /// Round-trips back to the sparse description.
  GainTable gain_table() const;

 private:
  NetworkInstance() = default;

  std::vector<FriendlyNode> nodes_;
  std::vector<Adversary> adversaries_;
  std::vector<double> friendly_gains_;
  std::vector<CsiEntry> adversary_gains_;
  std::unordered_map<NodeId, std::size_t> index_;
  double alpha_ = 2.0;
  int num_modes_ = 1;
  std::size_t source_index_ = 0;
  std::size_t dest_index_ = 0;
};

enum class AdversaryMode { Single, Multi };
enum class CsiVariant { Known, LinearTau, SquaredTau };

std::string to_string(AdversaryMode mode);
std::string to_string(CsiVariant variant);
AdversaryMode parse_adversary_mode(const std::string& text);
CsiVariant parse_csi_variant(const std::string& text);

struct PlannedLink {
  NodeId src = 0;
  NodeId dst = 0;
  double delta = 0.0;           // covertness share delta_i
  std::vector<double> powers;   // per mode
};

struct RoutePlan {
  std::vector<PlannedLink> links;
  double path_capacity = 0.0;  // nats per symbol
  std::string algorithm;       // "het-opt", "per-link-dep", "mode-<m>", "brute-force"
  CovertBudget budget;
  AdversaryMode adversary_mode = AdversaryMode::Multi;
  CsiVariant csi_variant = CsiVariant::Known;
  std::size_t willie = 0;       // adversary index, Single mode only
  bool extended_model = false;  // uncertain CSI with several adversaries

  std::size_t hops() const noexcept { return links.size(); }
  double delta_sum() const noexcept;
  /// Node ids along the route, source first.
  std::vector<NodeId> node_sequence() const;
};

/// Throws InvalidPlan unless the links form a contiguous simple source->dest
/// path over known nodes with positive shares and per-mode power vectors.
void validate_plan(const NetworkInstance& net, const RoutePlan& plan);

}  // namespace covroute
