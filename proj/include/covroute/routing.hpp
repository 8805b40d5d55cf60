#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "covroute/covert_metrics.hpp"
#include "covroute/model.hpp"

namespace covroute {

/// Directed graph over node ids with dense weights; +inf marks an absent edge.
class WeightedGraph {
 public:
  static constexpr double kAbsent = std::numeric_limits<double>::infinity();

  /// weights is row-major ids.size() x ids.size(). Throws InvalidArgument on
  /// negative/NaN weights, finite self-loops or duplicate ids.
  WeightedGraph(std::vector<NodeId> ids, std::vector<double> weights);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<NodeId>& ids() const noexcept { return ids_; }
  double weight(std::size_t from, std::size_t to) const { return weights_[from * ids_.size() + to]; }
  std::size_t index_of(NodeId id) const;

 private:
  std::vector<NodeId> ids_;
  std::vector<double> weights_;
};

/// Gamma for every ordered pair of friendly nodes, in network index order.
struct GammaMatrix {
  std::vector<NodeId> ids;
  std::vector<double> gamma;  // row-major, diagonal 0

  double at(std::size_t from, std::size_t to) const { return gamma[from * ids.size() + to]; }
  /// Edge weights 1/gamma, absent where gamma == 0.
  WeightedGraph inverse_weights() const;
};

/// Rows are split across `threads` workers; the result does not depend on it.
GammaMatrix compute_gamma_matrix(const NetworkInstance& net, const MetricOptions& opts,
                                 unsigned threads = 1);

/// Minimum-weight path (node ids, source first). Among equal totals the
/// lexicographically smallest id sequence wins. Throws NoFeasiblePath.
std::vector<NodeId> shortest_path(const WeightedGraph& graph, NodeId source, NodeId dest);

enum class HopSemantics {
  Widest,    // maximize the smallest gamma along the path
  Additive,  // minimize sum of 1/gamma
};

/// Best path with at most max_hops links, via max_hops rounds of edge
/// relaxation. Same tie-break as shortest_path. Throws NoFeasiblePath.
std::vector<NodeId> hop_limited_route(const GammaMatrix& gammas, NodeId source, NodeId dest,
                                      int max_hops, HopSemantics semantics = HopSemantics::Widest);

struct RoutingOptions {
  MetricOptions metric;
  HopSemantics hop_semantics = HopSemantics::Widest;
  int max_hops = 10;
  unsigned threads = 1;
};

/// Shortest path on 1/gamma, then splits delta so every hop has equal capacity.
RoutePlan het_opt(const NetworkInstance& net, const CovertBudget& budget,
                  const RoutingOptions& opts = {});

/// Fixed share delta/h per link, best route over h = 1..max_hops.
RoutePlan per_link_dep(const NetworkInstance& net, const CovertBudget& budget,
                       const RoutingOptions& opts = {});

/// het_opt with every mode except `mode` (zero-based) disabled on friendly links.
RoutePlan single_mode_baseline(const NetworkInstance& net, int mode, const CovertBudget& budget,
                               const RoutingOptions& opts = {});

inline constexpr std::size_t kBruteForceNodeLimit = 10;

/// Exhaustive search over simple paths. Throws InstanceTooLarge above
/// kBruteForceNodeLimit nodes.
RoutePlan brute_force_best_route(const NetworkInstance& net, const CovertBudget& budget,
                                 const RoutingOptions& opts = {});

/// Dispatches on "het-opt", "per-link-dep", "brute-force" or "mode-<m>" (1-based).
RoutePlan plan_by_name(const NetworkInstance& net, const std::string& algorithm,
                       const CovertBudget& budget, const RoutingOptions& opts = {});

/// Equalized allocation along a fixed path (used by het_opt and brute force).
RoutePlan plan_equalized(const NetworkInstance& net, const std::vector<NodeId>& path,
                         const CovertBudget& budget, const MetricOptions& metric,
                         std::string algorithm);

}  // namespace covroute
