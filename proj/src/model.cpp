#include "covroute/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "covroute/error.hpp"

namespace covroute {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::CoLocatedEntities: return "CoLocatedEntities";
    case ErrorCode::MissingGainEntry: return "MissingGainEntry";
    case ErrorCode::NonPositiveNoise: return "NonPositiveNoise";
    case ErrorCode::SourceEqualsDest: return "SourceEqualsDest";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveBudget: return "NonPositiveBudget";
    case ErrorCode::UnusableLink: return "UnusableLink";
    case ErrorCode::NoFeasiblePath: return "NoFeasiblePath";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::PlacementInfeasible: return "PlacementInfeasible";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

CovertBudget CovertBudget::make(double epsilon, std::int64_t n) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon) || n < 1) {
    std::ostringstream os;
    os << "covertness budget requires epsilon > 0 and n >= 1 (got epsilon=" << epsilon
       << ", n=" << n << ")";
    throw Error(ErrorCode::NonPositiveBudget, os.str());
  }
  return CovertBudget{epsilon, n, epsilon / static_cast<double>(n)};
}

double distance(Position a, Position b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double nominal_gain(const CsiEntry& entry) noexcept {
  if (const auto* k = std::get_if<KnownGain>(&entry)) return k->g;
  return std::get<RicianGain>(entry).v;
}

double csi_sigma(const CsiEntry& entry) noexcept {
  if (const auto* r = std::get_if<RicianGain>(&entry)) return r->sigma_err;
  return 0.0;
}

void GainTable::set_friendly(NodeId src, NodeId dst, int mode, double g) {
  friendly_[{src, dst, mode}] = g;
}

void GainTable::set_adversary(NodeId src, NodeId adv, int mode, CsiEntry entry) {
  adversary_[{src, adv, mode}] = entry;
}

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

template <typename Entity>
void check_entity(const Entity& e, std::size_t modes, const char* kind) {
  if (!std::isfinite(e.pos.x) || !std::isfinite(e.pos.y)) {
    fail(ErrorCode::InvalidArgument,
         std::string(kind) + " " + std::to_string(e.id) + " has a non-finite position");
  }
  if (e.noise_var.size() != modes) {
    fail(ErrorCode::InvalidArgument, std::string(kind) + " " + std::to_string(e.id) +
                                         " has " + std::to_string(e.noise_var.size()) +
                                         " noise variances, expected " +
                                         std::to_string(modes));
  }
  for (double s : e.noise_var) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      fail(ErrorCode::NonPositiveNoise,
           std::string(kind) + " " + std::to_string(e.id) + " has non-positive noise variance");
    }
  }
}

bool valid_gain(double g) { return g >= 0.0 && std::isfinite(g); }

}  // namespace

NetworkInstance NetworkInstance::build(std::vector<FriendlyNode> nodes,
                                       std::vector<Adversary> adversaries,
                                       const GainTable& gains, double alpha, NodeId source,
                                       NodeId dest) {
  if (nodes.empty()) fail(ErrorCode::InvalidArgument, "network has no friendly nodes");
  if (!(alpha >= 2.0) || !std::isfinite(alpha)) {
    fail(ErrorCode::InvalidArgument, "path-loss exponent must be finite and >= 2");
  }
  if (source == dest) fail(ErrorCode::SourceEqualsDest, "source and destination coincide");

  const std::size_t modes = nodes.front().noise_var.size();
  if (modes == 0) fail(ErrorCode::InvalidArgument, "network needs at least one mode");

  NetworkInstance net;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    check_entity(nodes[i], modes, "node");
    if (!net.index_.emplace(nodes[i].id, i).second) {
      fail(ErrorCode::DuplicateId, "duplicate node id " + std::to_string(nodes[i].id));
    }
  }
  std::unordered_map<NodeId, std::size_t> adv_index;
  for (std::size_t k = 0; k < adversaries.size(); ++k) {
    check_entity(adversaries[k], modes, "adversary");
    if (!adv_index.emplace(adversaries[k].id, k).second) {
      fail(ErrorCode::DuplicateId, "duplicate adversary id " + std::to_string(adversaries[k].id));
    }
  }

  std::vector<Position> all;
  for (const auto& n : nodes) all.push_back(n.pos);
  for (const auto& a : adversaries) all.push_back(a.pos);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (distance(all[i], all[j]) <= 0.0) {
        fail(ErrorCode::CoLocatedEntities,
             "entities " + std::to_string(i) + " and " + std::to_string(j) + " are co-located");
      }
    }
  }

  const auto src_it = net.index_.find(source);
  const auto dst_it = net.index_.find(dest);
  if (src_it == net.index_.end() || dst_it == net.index_.end()) {
    fail(ErrorCode::InvalidArgument, "source or destination id is not a friendly node");
  }

  const std::size_t n = nodes.size();
  const std::size_t k = adversaries.size();
  net.friendly_gains_.assign(n * n * modes, 0.0);
  net.adversary_gains_.assign(n * k * modes, KnownGain{0.0});

  std::set<GainTable::Key> seen;
  for (const auto& [key, g] : gains.friendly()) {
    const auto [s, d, m] = key;
    const auto si = net.index_.find(s);
    const auto di = net.index_.find(d);
    if (si == net.index_.end() || di == net.index_.end() || s == d || m < 0 ||
        static_cast<std::size_t>(m) >= modes) {
      fail(ErrorCode::InvalidArgument, "friendly gain entry (" + std::to_string(s) + "," +
                                           std::to_string(d) + "," + std::to_string(m + 1) +
                                           ") does not match the network");
    }
    if (!valid_gain(g)) fail(ErrorCode::InvalidArgument, "friendly gains must be finite and >= 0");
    net.friendly_gains_[(si->second * n + di->second) * modes + m] = g;
    seen.insert(key);
  }
  for (const auto& a : nodes) {
    for (const auto& b : nodes) {
      if (a.id == b.id) continue;
      for (std::size_t m = 0; m < modes; ++m) {
        if (!seen.contains({a.id, b.id, static_cast<int>(m)})) {
          fail(ErrorCode::MissingGainEntry, "missing friendly gain (" + std::to_string(a.id) +
                                                "," + std::to_string(b.id) + ", mode " +
                                                std::to_string(m + 1) + ")");
        }
      }
    }
  }

  seen.clear();
  for (const auto& [key, entry] : gains.adversary()) {
    const auto [s, w, m] = key;
    const auto si = net.index_.find(s);
    const auto wi = adv_index.find(w);
    if (si == net.index_.end() || wi == adv_index.end() || m < 0 ||
        static_cast<std::size_t>(m) >= modes) {
      fail(ErrorCode::InvalidArgument, "adversary gain entry (" + std::to_string(s) + "," +
                                           std::to_string(w) + "," + std::to_string(m + 1) +
                                           ") does not match the network");
    }
    if (!valid_gain(nominal_gain(entry)) || !valid_gain(csi_sigma(entry))) {
      fail(ErrorCode::InvalidArgument, "adversary gains must be finite and >= 0");
    }
    net.adversary_gains_[(si->second * k + wi->second) * modes + m] = entry;
    seen.insert(key);
  }
  for (const auto& a : nodes) {
    for (const auto& w : adversaries) {
      for (std::size_t m = 0; m < modes; ++m) {
        if (!seen.contains({a.id, w.id, static_cast<int>(m)})) {
          fail(ErrorCode::MissingGainEntry, "missing adversary gain (" + std::to_string(a.id) +
                                                "," + std::to_string(w.id) + ", mode " +
                                                std::to_string(m + 1) + ")");
        }
      }
    }
  }

  net.nodes_ = std::move(nodes);
  net.adversaries_ = std::move(adversaries);
  net.alpha_ = alpha;
  net.num_modes_ = static_cast<int>(modes);
  net.source_index_ = src_it->second;
  net.dest_index_ = dst_it->second;
  return net;
}

std::optional<std::size_t> NetworkInstance::find_index(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t NetworkInstance::index_of(NodeId id) const {
  if (auto i = find_index(id)) return *i;
  throw Error(ErrorCode::InvalidArgument, "unknown node id " + std::to_string(id));
}

NetworkInstance NetworkInstance::restricted_to_mode(int keep_mode) const {
  if (keep_mode < 0 || keep_mode >= num_modes_) {
    throw Error(ErrorCode::InvalidArgument, "mode index out of range");
  }
  NetworkInstance copy = *this;
  for (std::size_t i = 0; i < copy.friendly_gains_.size(); ++i) {
    if (static_cast<int>(i % num_modes_) != keep_mode) copy.friendly_gains_[i] = 0.0;
  }
  return copy;
}

NetworkInstance NetworkInstance::with_alpha(double alpha) const {
  if (!(alpha >= 2.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::InvalidArgument, "path-loss exponent must be finite and >= 2");
  }
  NetworkInstance copy = *this;
  copy.alpha_ = alpha;
  return copy;
}

GainTable NetworkInstance::gain_table() const {
  GainTable table;
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (int m = 0; m < num_modes_; ++m) {
        table.set_friendly(nodes_[i].id, nodes_[j].id, m, friendly_gain(i, j, m));
      }
    }
    for (std::size_t k = 0; k < adversaries_.size(); ++k) {
      for (int m = 0; m < num_modes_; ++m) {
        table.set_adversary(nodes_[i].id, adversaries_[k].id, m, adversary_gain(i, k, m));
      }
    }
  }
  return table;
}

std::string to_string(AdversaryMode mode) {
  return mode == AdversaryMode::Single ? "single" : "multi";
}

std::string to_string(CsiVariant variant) {
  switch (variant) {
    case CsiVariant::Known: return "known";
    case CsiVariant::LinearTau: return "linear-tau";
    case CsiVariant::SquaredTau: return "squared-tau";
  }
  return "known";
}

AdversaryMode parse_adversary_mode(const std::string& text) {
  if (text == "single") return AdversaryMode::Single;
  if (text == "multi") return AdversaryMode::Multi;
  throw Error(ErrorCode::InvalidArgument, "unknown adversary mode '" + text + "'");
}

CsiVariant parse_csi_variant(const std::string& text) {
  if (text == "known") return CsiVariant::Known;
  if (text == "linear-tau") return CsiVariant::LinearTau;
  if (text == "squared-tau") return CsiVariant::SquaredTau;
  throw Error(ErrorCode::InvalidArgument, "unknown CSI variant '" + text + "'");
}

double RoutePlan::delta_sum() const noexcept {
  double sum = 0.0;
  for (const auto& l : links) sum += l.delta;
  return sum;
}

std::vector<NodeId> RoutePlan::node_sequence() const {
  std::vector<NodeId> seq;
  if (links.empty()) return seq;
  seq.push_back(links.front().src);
  for (const auto& l : links) seq.push_back(l.dst);
  return seq;
}

void validate_plan(const NetworkInstance& net, const RoutePlan& plan) {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidPlan, msg); };
  if (plan.links.empty()) bad("plan has no links");
  if (plan.links.front().src != net.source()) bad("plan does not start at the source");
  if (plan.links.back().dst != net.dest()) bad("plan does not end at the destination");

  std::set<NodeId> visited{plan.links.front().src};
  for (std::size_t i = 0; i < plan.links.size(); ++i) {
    const auto& l = plan.links[i];
    if (!net.find_index(l.src) || !net.find_index(l.dst)) bad("plan references an unknown node");
    if (i > 0 && plan.links[i - 1].dst != l.src) bad("plan links are not contiguous");
    if (!visited.insert(l.dst).second) bad("plan revisits node " + std::to_string(l.dst));
    if (!(l.delta > 0.0) || !std::isfinite(l.delta)) bad("plan link has a non-positive share");
    if (l.powers.size() != static_cast<std::size_t>(net.num_modes())) {
      bad("plan link power vector does not match the mode count");
    }
    for (double p : l.powers) {
      if (!(p >= 0.0) || !std::isfinite(p)) bad("plan link has a negative or non-finite power");
    }
  }
}

}  // namespace covroute
