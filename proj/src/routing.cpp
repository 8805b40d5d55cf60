#include "covroute/routing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <unordered_set>

#include "covroute/error.hpp"

namespace covroute {

namespace {

[[noreturn]] void no_path(NodeId source, NodeId dest) {
  throw Error(ErrorCode::NoFeasiblePath, "no usable path from " + std::to_string(source) +
                                             " to " + std::to_string(dest));
}

bool contains(const std::vector<NodeId>& path, NodeId id) {
  return std::find(path.begin(), path.end(), id) != path.end();
}

std::vector<NodeId> extended(const std::vector<NodeId>& path, NodeId next) {
  std::vector<NodeId> out(path);
  out.push_back(next);
  return out;
}

std::size_t matrix_index(const std::vector<NodeId>& ids, NodeId id) {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
  return static_cast<std::size_t>(it - ids.begin());
}

std::vector<double> path_gammas(const GammaMatrix& gm, const std::vector<NodeId>& path) {
  std::vector<double> g;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    g.push_back(gm.at(matrix_index(gm.ids, path[i]), matrix_index(gm.ids, path[i + 1])));
  }
  return g;
}

RoutePlan empty_plan(const CovertBudget& budget, const MetricOptions& metric, std::string tag) {
  RoutePlan plan;
  plan.algorithm = std::move(tag);
  plan.budget = budget;
  plan.adversary_mode = metric.adversary_mode;
  plan.csi_variant = metric.csi;
  plan.willie = metric.willie;
  plan.extended_model = metric.extended;
  return plan;
}

}  // namespace

WeightedGraph::WeightedGraph(std::vector<NodeId> ids, std::vector<double> weights)
    : ids_(std::move(ids)), weights_(std::move(weights)) {
  const std::size_t n = ids_.size();
  if (weights_.size() != n * n) {
    throw Error(ErrorCode::InvalidArgument, "weight matrix does not match node count");
  }
  std::unordered_set<NodeId> seen;
  for (NodeId id : ids_) {
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, "duplicate graph node id");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights_[i * n + j];
      if (std::isnan(w) || w < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "edge weights must be >= 0");
      }
      if (i == j && w != kAbsent) throw Error(ErrorCode::InvalidArgument, "self-loops are not allowed");
    }
  }
}

std::size_t WeightedGraph::index_of(NodeId id) const { return matrix_index(ids_, id); }

WeightedGraph GammaMatrix::inverse_weights() const {
  std::vector<double> w(gamma.size(), WeightedGraph::kAbsent);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (gamma[i] > 0.0) w[i] = 1.0 / gamma[i];
  }
  return WeightedGraph(ids, std::move(w));
}

GammaMatrix compute_gamma_matrix(const NetworkInstance& net, const MetricOptions& opts,
                                 unsigned threads) {
  const std::size_t n = net.node_count();
  GammaMatrix gm;
  for (const auto& node : net.nodes()) gm.ids.push_back(node.id);
  gm.gamma.assign(n * n, 0.0);

  auto fill_rows = [&](std::size_t first, std::size_t step) {
    for (std::size_t i = first; i < n; i += step) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) gm.gamma[i * n + j] = link_metric(net, gm.ids[i], gm.ids[j], opts).gamma;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    fill_rows(0, 1);
    return gm;
  }
  // Validate options once on this thread so errors propagate normally.
  if (n >= 2) link_metric(net, gm.ids[0], gm.ids[1], opts);
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(fill_rows, w, workers);
  pool.clear();
  return gm;
}

std::vector<NodeId> shortest_path(const WeightedGraph& graph, NodeId source, NodeId dest) {
  const std::size_t n = graph.size();
  const std::size_t s = graph.index_of(source);
  const std::size_t t = graph.index_of(dest);
  const auto& ids = graph.ids();

  std::vector<double> dist(n, WeightedGraph::kAbsent);
  std::vector<std::vector<NodeId>> path(n);
  std::vector<bool> settled(n, false);
  dist[s] = 0.0;
  path[s] = {source};

  // Array-based Dijkstra; labels are ordered by (distance, id sequence).
  for (std::size_t iter = 0; iter < n; ++iter) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (settled[v] || dist[v] == WeightedGraph::kAbsent) continue;
      if (u == n || dist[v] < dist[u] || (dist[v] == dist[u] && path[v] < path[u])) u = v;
    }
    if (u == n) break;
    settled[u] = true;
    if (u == t) break;
    for (std::size_t v = 0; v < n; ++v) {
      const double w = graph.weight(u, v);
      if (settled[v] || w == WeightedGraph::kAbsent) continue;
      const double cand = dist[u] + w;
      if (cand < dist[v]) {
        dist[v] = cand;
        path[v] = extended(path[u], ids[v]);
      } else if (cand == dist[v]) {
        auto alt = extended(path[u], ids[v]);
        if (alt < path[v]) path[v] = std::move(alt);
      }
    }
  }
  if (!settled[t]) no_path(source, dest);
  return path[t];
}

std::vector<NodeId> hop_limited_route(const GammaMatrix& gammas, NodeId source, NodeId dest,
                                      int max_hops, HopSemantics semantics) {
  if (max_hops < 1) throw Error(ErrorCode::InvalidArgument, "hop limit must be >= 1");
  const std::size_t n = gammas.ids.size();
  const std::size_t s = matrix_index(gammas.ids, source);
  const std::size_t t = matrix_index(gammas.ids, dest);
  const bool widest = semantics == HopSemantics::Widest;

  // value: bottleneck gamma (larger is better) or additive 1/gamma cost (smaller is better).
  struct Label {
    bool reached = false;
    double value = 0.0;
    std::vector<NodeId> path;
  };
  auto better = [widest](double cand, const std::vector<NodeId>& cand_path, const Label& cur) {
    if (!cur.reached) return true;
    if (cand != cur.value) return widest ? cand > cur.value : cand < cur.value;
    return cand_path < cur.path;
  };

  std::vector<Label> prev(n);
  prev[s] = Label{true, widest ? WeightedGraph::kAbsent : 0.0, {source}};

  for (int round = 0; round < max_hops; ++round) {
    std::vector<Label> next = prev;
    for (std::size_t u = 0; u < n; ++u) {
      if (!prev[u].reached || u == t) continue;
      for (std::size_t v = 0; v < n; ++v) {
        const double g = gammas.at(u, v);
        if (u == v || !(g > 0.0) || contains(prev[u].path, gammas.ids[v])) continue;
        const double cand = widest ? std::min(prev[u].value, g) : prev[u].value + 1.0 / g;
        auto cand_path = extended(prev[u].path, gammas.ids[v]);
        if (better(cand, cand_path, next[v])) next[v] = Label{true, cand, std::move(cand_path)};
      }
    }
    prev = std::move(next);
  }
  if (!prev[t].reached) no_path(source, dest);
  return prev[t].path;
}

RoutePlan plan_equalized(const NetworkInstance& net, const std::vector<NodeId>& path,
                         const CovertBudget& budget, const MetricOptions& metric,
                         std::string algorithm) {
  if (path.size() < 2) throw Error(ErrorCode::InvalidArgument, "path needs at least one link");
  std::vector<LinkMetric> metrics;
  std::vector<double> gammas;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    metrics.push_back(link_metric(net, path[i], path[i + 1], metric));
    gammas.push_back(metrics.back().gamma);
  }
  RoutePlan plan = empty_plan(budget, metric, std::move(algorithm));
  plan.path_capacity = path_capacity(budget.delta, gammas);
  for (const auto& m : metrics) {
    const double share = allocate_delta(plan.path_capacity, m.gamma);
    plan.links.push_back(PlannedLink{m.src, m.dst, share, optimal_mode_powers(m, share)});
  }
  return plan;
}

RoutePlan het_opt(const NetworkInstance& net, const CovertBudget& budget,
                  const RoutingOptions& opts) {
  const GammaMatrix gm = compute_gamma_matrix(net, opts.metric, opts.threads);
  const auto path = shortest_path(gm.inverse_weights(), net.source(), net.dest());
  return plan_equalized(net, path, budget, opts.metric, "het-opt");
}

RoutePlan per_link_dep(const NetworkInstance& net, const CovertBudget& budget,
                       const RoutingOptions& opts) {
  if (opts.max_hops < 1) throw Error(ErrorCode::InvalidArgument, "hop limit must be >= 1");
  const GammaMatrix gm = compute_gamma_matrix(net, opts.metric, opts.threads);

  std::vector<NodeId> best_path;
  double best_capacity = -1.0;
  int best_h = 0;
  for (int h = 1; h <= opts.max_hops; ++h) {
    std::vector<NodeId> path;
    try {
      path = hop_limited_route(gm, net.source(), net.dest(), h, opts.hop_semantics);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoFeasiblePath) continue;
      throw;
    }
    const double share = budget.delta / h;
    double capacity = WeightedGraph::kAbsent;
    for (double g : path_gammas(gm, path)) capacity = std::min(capacity, link_capacity(share, g));
    if (capacity > best_capacity) {
      best_capacity = capacity;
      best_path = std::move(path);
      best_h = h;
    }
  }
  if (best_path.empty()) no_path(net.source(), net.dest());

  RoutePlan plan = empty_plan(budget, opts.metric, "per-link-dep");
  plan.path_capacity = best_capacity;
  const double share = budget.delta / best_h;
  for (std::size_t i = 0; i + 1 < best_path.size(); ++i) {
    const auto m = link_metric(net, best_path[i], best_path[i + 1], opts.metric);
    plan.links.push_back(PlannedLink{m.src, m.dst, share, optimal_mode_powers(m, share)});
  }
  return plan;
}

RoutePlan single_mode_baseline(const NetworkInstance& net, int mode, const CovertBudget& budget,
                               const RoutingOptions& opts) {
  RoutePlan plan = het_opt(net.restricted_to_mode(mode), budget, opts);
  plan.algorithm = "mode-" + std::to_string(mode + 1);
  return plan;
}

RoutePlan brute_force_best_route(const NetworkInstance& net, const CovertBudget& budget,
                                 const RoutingOptions& opts) {
  const std::size_t n = net.node_count();
  if (n > kBruteForceNodeLimit) {
    throw Error(ErrorCode::InstanceTooLarge, "brute force is limited to " +
                                                 std::to_string(kBruteForceNodeLimit) + " nodes");
  }
  const GammaMatrix gm = compute_gamma_matrix(net, opts.metric, opts.threads);

  // Visit neighbours in id order so paths are enumerated lexicographically.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return gm.ids[a] < gm.ids[b]; });

  const std::size_t s = net.source_index();
  const std::size_t t = net.dest_index();
  std::vector<NodeId> best;
  double best_cost = WeightedGraph::kAbsent;
  std::vector<NodeId> current{gm.ids[s]};
  std::vector<bool> on_path(n, false);
  on_path[s] = true;

  auto dfs = [&](auto&& self, std::size_t u, double cost) -> void {
    if (u == t) {
      if (cost < best_cost) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    for (std::size_t v : order) {
      const double g = gm.at(u, v);
      if (on_path[v] || !(g > 0.0)) continue;
      on_path[v] = true;
      current.push_back(gm.ids[v]);
      self(self, v, cost + 1.0 / g);
      current.pop_back();
      on_path[v] = false;
    }
  };
  dfs(dfs, s, 0.0);

  if (best.empty()) no_path(net.source(), net.dest());
  return plan_equalized(net, best, budget, opts.metric, "brute-force");
}

RoutePlan plan_by_name(const NetworkInstance& net, const std::string& algorithm,
                       const CovertBudget& budget, const RoutingOptions& opts) {
  if (algorithm == "het-opt") return het_opt(net, budget, opts);
  if (algorithm == "per-link-dep") return per_link_dep(net, budget, opts);
  if (algorithm == "brute-force") return brute_force_best_route(net, budget, opts);
  if (algorithm.rfind("mode-", 0) == 0) {
    std::size_t used = 0;
    int mode = 0;
    try {
      mode = std::stoi(algorithm.substr(5), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == algorithm.size() - 5 && mode >= 1 && mode <= net.num_modes()) {
      return single_mode_baseline(net, mode - 1, budget, opts);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + algorithm + "'");
}

}  // namespace covroute
