#include "covroute/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>
#include <thread>
#include <tuple>

#include "covroute/error.hpp"
#include "covroute/random.hpp"

namespace covroute {

namespace {

// Stream tags; each draw family gets its own counter-based stream.
enum StreamTag : std::uint64_t {
  kRelayPosition = 1,
  kNodeNoise = 2,
  kFriendlyGain = 3,
  kAdversaryPosition = 4,
  kAdversaryGain = 5,
  kDestAngle = 6,
  kAdversaryAngle = 7,
};

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }

Position uniform_position(const ExperimentSpec& spec, RandomStream& rng) {
  const double x = spec.width * rng.uniform01();
  const double y = spec.height * rng.uniform01();
  return {x, y};
}

Position on_circle(Position center, double radius, RandomStream& rng) {
  const double theta = 2.0 * std::numbers::pi * rng.uniform01();
  return {center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
}

bool hits_any(Position p, std::span<const Position> others) {
  return std::any_of(others.begin(), others.end(),
                     [p](Position q) { return distance(p, q) <= 0.0; });
}

Position source_position(const ExperimentSpec& spec) {
  return spec.geometry.source.value_or(spec.source_pos);
}

bool is_known_algorithm(const std::string& name, int modes) {
  if (name == "het-opt" || name == "per-link-dep" || name == "brute-force") return true;
  if (name.rfind("mode-", 0) == 0) {
    try {
      std::size_t used = 0;
      const int m = std::stoi(name.substr(5), &used);
      return used == name.size() - 5 && m >= 1 && m <= modes;
    } catch (const std::exception&) {
      return false;
    }
  }
  return false;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (trials < 1) invalid("trials must be >= 1");
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    invalid("region must have positive extent");
  }
  if (n_nodes.empty() || n_adversaries.empty() || alpha.empty()) {
    invalid("n_nodes, n_adversaries and alpha need at least one value");
  }
  for (int n : n_nodes) {
    if (n < 2) invalid("n_nodes values must be >= 2");
  }
  for (int k : n_adversaries) {
    if (k < 1) invalid("n_adversaries values must be >= 1");
  }
  for (double a : alpha) {
    if (!(a >= 2.0) || !std::isfinite(a)) invalid("alpha values must be finite and >= 2");
  }
  if (placement.kind == PlacementKind::Intelligent) {
    const double diagonal = std::hypot(width, height);
    if (!(placement.min_dist >= 0.0) || !(placement.min_dist < diagonal)) {
      invalid("min_dist must lie in [0, region diagonal)");
    }
  }
  if (placement.max_retries < 1) invalid("max_retries must be >= 1");
  channel.validate();
  if (algorithms.empty()) invalid("at least one algorithm is required");
  for (const auto& a : algorithms) {
    if (!is_known_algorithm(a, static_cast<int>(channel.modes.size()))) {
      invalid("unknown algorithm '" + a + "'");
    }
  }
  if (max_hops < 1) invalid("max_hops must be >= 1");
  if (distance(source_position(*this), dest_pos) <= 0.0) {
    throw Error(ErrorCode::CoLocatedEntities, "source and destination positions coincide");
  }
  if (geometry.mode != GeometryMode::None) {
    if (geometry.distances.empty()) invalid("geometry sweep needs at least one distance");
    for (double d : geometry.distances) {
      if (!std::isfinite(d) || d < 0.0) invalid("swept distances must be finite and >= 0");
      if (d == 0.0) {
        throw Error(ErrorCode::CoLocatedEntities, "a swept radius of 0 co-locates entities");
      }
    }
    if (!(geometry.dest_radius > 0.0)) {
      throw Error(ErrorCode::CoLocatedEntities, "dest_radius must be positive");
    }
  }
  sweep_key(*this);
}

std::string sweep_key(const ExperimentSpec& spec) {
  std::vector<std::string> multi;
  if (spec.n_nodes.size() > 1) multi.push_back("n_nodes");
  if (spec.n_adversaries.size() > 1) multi.push_back("n_adversaries");
  if (spec.alpha.size() > 1) multi.push_back("alpha");
  if (spec.geometry.mode != GeometryMode::None) {
    multi.push_back(spec.geometry.mode == GeometryMode::SdDistance ? "sd_distance"
                                                                   : "sw_distance");
    if (multi.size() > 1) invalid("a geometry sweep cannot be combined with another list");
  }
  if (multi.size() > 1) invalid("only one of n_nodes, n_adversaries, alpha may be swept");
  return multi.empty() ? "n_nodes" : multi.front();
}

std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec) {
  const std::string key = sweep_key(spec);
  SweepPoint base{spec.n_nodes.front(), spec.n_adversaries.front(), spec.alpha.front(), 0.0, 0.0};
  std::vector<SweepPoint> points;
  if (key == "n_nodes") {
    for (int n : spec.n_nodes) {
      SweepPoint p = base;
      p.n_nodes = n;
      p.value = n;
      points.push_back(p);
    }
  } else if (key == "n_adversaries") {
    for (int k : spec.n_adversaries) {
      SweepPoint p = base;
      p.n_adversaries = k;
      p.value = k;
      points.push_back(p);
    }
  } else if (key == "alpha") {
    for (double a : spec.alpha) {
      SweepPoint p = base;
      p.alpha = a;
      p.value = a;
      points.push_back(p);
    }
  } else {
    for (double r : spec.geometry.distances) {
      SweepPoint p = base;
      p.radius = r;
      p.value = r;
      points.push_back(p);
    }
  }
  return points;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index) {
  return derive_seed(master_seed, {0x747269616cULL, static_cast<std::uint64_t>(trial_index)});
}

std::vector<Position> place_adversaries(const ExperimentSpec& spec, int count,
                                        std::uint64_t sub_seed, std::span<const Position> avoid) {
  if (count < 1) invalid("adversary count must be >= 1");
  const bool spaced = spec.placement.kind == PlacementKind::Intelligent;
  std::vector<Position> placed;
  for (int k = 0; k < count; ++k) {
    RandomStream rng(derive_seed(sub_seed, {kAdversaryPosition, static_cast<std::uint64_t>(k)}));
    bool ok = false;
    for (int attempt = 0; attempt < spec.placement.max_retries && !ok; ++attempt) {
      const Position p = uniform_position(spec, rng);
      if (hits_any(p, avoid) || hits_any(p, placed)) continue;
      if (spaced && std::any_of(placed.begin(), placed.end(), [&](Position q) {
            return distance(p, q) < spec.placement.min_dist;
          })) {
        continue;
      }
      placed.push_back(p);
      ok = true;
    }
    if (!ok) {
      throw Error(ErrorCode::PlacementInfeasible,
                  "could not place adversary " + std::to_string(k + 1) + " of " +
                      std::to_string(count) + " within " +
                      std::to_string(spec.placement.max_retries) + " draws");
    }
  }
  return placed;
}

std::vector<Position> place_adversaries(const ExperimentSpec& spec, std::size_t trial_index) {
  return place_adversaries(spec, spec.n_adversaries.front(),
                           trial_seed(spec.master_seed, trial_index));
}

NetworkInstance generate_network(const ExperimentSpec& spec, const SweepPoint& point,
                                 std::size_t trial_index) {
  const std::uint64_t sub = trial_seed(spec.master_seed, trial_index);
  const std::size_t n = static_cast<std::size_t>(point.n_nodes);
  const std::size_t modes = spec.channel.modes.size();
  const Position src = source_position(spec);

  std::vector<Position> pos;
  pos.push_back(src);
  if (spec.geometry.mode == GeometryMode::SdDistance) {
    RandomStream rng(derive_seed(sub, {kDestAngle}));
    pos.push_back(on_circle(src, point.radius, rng));
  } else if (spec.geometry.mode == GeometryMode::SwDistance && n == 2) {
    RandomStream rng(derive_seed(sub, {kDestAngle}));
    pos.push_back(on_circle(src, spec.geometry.dest_radius, rng));
  } else {
    pos.push_back(spec.dest_pos);
  }
  for (std::size_t i = 2; i < n; ++i) {
    RandomStream rng(derive_seed(sub, {kRelayPosition, i}));
    Position p = uniform_position(spec, rng);
    while (hits_any(p, pos)) p = uniform_position(spec, rng);
    pos.push_back(p);
  }

  std::vector<Position> adv_pos;
  if (spec.geometry.mode == GeometryMode::SwDistance) {
    for (int k = 0; k < point.n_adversaries; ++k) {
      RandomStream rng(derive_seed(sub, {kAdversaryAngle, static_cast<std::uint64_t>(k)}));
      Position p = on_circle(src, point.radius, rng);
      while (hits_any(p, pos) || hits_any(p, adv_pos)) p = on_circle(src, point.radius, rng);
      adv_pos.push_back(p);
    }
  } else {
    adv_pos = place_adversaries(spec, point.n_adversaries, sub, pos);
  }

  std::vector<FriendlyNode> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    FriendlyNode node{static_cast<NodeId>(i), pos[i], {}};
    for (std::size_t m = 0; m < modes; ++m) {
      RandomStream rng(derive_seed(sub, {kNodeNoise, i, m}));
      node.noise_var.push_back(sample_friendly_noise(spec.channel.modes[m], rng));
    }
    nodes.push_back(std::move(node));
  }
  std::vector<Adversary> adversaries;
  for (std::size_t k = 0; k < adv_pos.size(); ++k) {
    Adversary a{static_cast<NodeId>(k), adv_pos[k], {}};
    for (const auto& mc : spec.channel.modes) a.noise_var.push_back(mc.adversary_noise);
    adversaries.push_back(std::move(a));
  }

  GainTable gains;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t m = 0; m < modes; ++m) {
        RandomStream rng(derive_seed(sub, {kFriendlyGain, i, j, m}));
        const double g = sample_gain(spec.channel.modes[m], rng);
        gains.set_friendly(static_cast<NodeId>(i), static_cast<NodeId>(j), static_cast<int>(m), g);
        gains.set_friendly(static_cast<NodeId>(j), static_cast<NodeId>(i), static_cast<int>(m), g);
      }
    }
    for (std::size_t k = 0; k < adversaries.size(); ++k) {
      for (std::size_t m = 0; m < modes; ++m) {
        const auto& mc = spec.channel.modes[m];
        RandomStream rng(derive_seed(sub, {kAdversaryGain, i, k, m}));
        const double g = sample_gain(mc, rng);
        CsiEntry entry = KnownGain{g};
        if (mc.adversary_sigma_err > 0.0) entry = RicianGain{g, mc.adversary_sigma_err};
        gains.set_adversary(static_cast<NodeId>(i), static_cast<NodeId>(k), static_cast<int>(m),
                            entry);
      }
    }
  }
  return NetworkInstance::build(std::move(nodes), std::move(adversaries), gains, point.alpha, 0, 1);
}

NetworkInstance generate_network(const ExperimentSpec& spec, std::size_t trial_index) {
  return generate_network(spec, sweep_points(spec).front(), trial_index);
}

TrialRecord run_algorithm(const NetworkInstance& net, const ExperimentSpec& spec,
                          const std::string& algorithm) {
  RoutingOptions opts;
  opts.metric = spec.metric;
  opts.hop_semantics = spec.hop_semantics;
  opts.max_hops = spec.max_hops;

  TrialRecord rec;
  rec.algorithm = algorithm;
  rec.n_nodes = static_cast<int>(net.node_count());
  rec.n_adversaries = static_cast<int>(net.adversary_count());
  rec.alpha = net.alpha();
  try {
    const RoutePlan plan = plan_by_name(net, algorithm, spec.budget, opts);
    rec.capacity = plan.path_capacity;
    rec.hops = static_cast<int>(plan.hops());
    rec.feasible = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoFeasiblePath) throw;
    rec.capacity = 0.0;
    rec.hops = 0;
    rec.feasible = false;
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads,
                                const RecordSink& sink) {
  spec.validate();
  const auto points = sweep_points(spec);
  const std::string key = sweep_key(spec);
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t total = points.size() * trials;
  const std::size_t workers = std::max(1u, threads);
  const std::size_t batch_size = 64 * workers;

  auto run_item = [&](std::size_t item) {
    const SweepPoint& point = points[item / trials];
    const std::size_t trial = item % trials;
    const NetworkInstance net = generate_network(spec, point, trial);
    std::vector<TrialRecord> out;
    for (const auto& algorithm : spec.algorithms) {
      TrialRecord rec = run_algorithm(net, spec, algorithm);
      rec.experiment_id = spec.experiment_id;
      rec.sweep_key = key;
      rec.sweep_value = point.value;
      rec.trial = static_cast<int>(trial);
      rec.sub_seed = trial_seed(spec.master_seed, trial);
      out.push_back(std::move(rec));
    }
    return out;
  };

  ExperimentResult result;
  for (std::size_t begin = 0; begin < total; begin += batch_size) {
    const std::size_t end = std::min(total, begin + batch_size);
    std::vector<std::vector<TrialRecord>> slots(end - begin);
    std::atomic<std::size_t> next{begin};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
      for (std::size_t i = next++; i < end && !failed; i = next++) {
        try {
          slots[i - begin] = run_item(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    };
    if (workers == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    const std::size_t first = result.records.size();
    for (auto& slot : slots) {
      for (auto& rec : slot) result.records.push_back(std::move(rec));
    }
    if (sink) {
      sink(std::span<const TrialRecord>(result.records).subspan(first));
    }
  }
  result.summary = summarize(result.records);
  return result;
}

ExperimentResult single_link_study(const ExperimentSpec& spec, unsigned threads,
                                   const RecordSink& sink) {
  if (spec.geometry.mode == GeometryMode::None) {
    invalid("single-link study needs a geometry sweep (sd_distance or sw_distance)");
  }
  ExperimentSpec two_node = spec;
  two_node.n_nodes = {2};
  return run_experiment(two_node, threads, sink);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<SummaryRow> summarize(std::span<const TrialRecord> records) {
  using Key = std::tuple<std::string, std::string, double, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<Key> order;
  std::vector<std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    Key key{r.experiment_id, r.sweep_key, r.sweep_value, r.algorithm};
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) {
      order.push_back(key);
      groups.emplace_back();
    }
    groups[it->second].push_back(&r);
  }

  std::vector<SummaryRow> rows;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    std::vector<double> caps;
    std::vector<double> hops;
    std::size_t infeasible = 0;
    for (const auto* r : members) {
      caps.push_back(r->capacity);
      if (r->feasible) {
        hops.push_back(r->hops);
      } else {
        ++infeasible;
      }
    }
    const double n = static_cast<double>(caps.size());
    const double mean = pairwise_sum(caps) / n;
    std::vector<double> sq;
    for (double c : caps) sq.push_back((c - mean) * (c - mean));
    const double var = caps.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;

    SummaryRow row;
    std::tie(row.experiment_id, row.sweep_key, row.sweep_value, row.algorithm) = order[g];
    row.trials = static_cast<int>(caps.size());
    row.mean_capacity = mean;
    row.stderr_capacity = std::sqrt(var / n);
    row.infeasible_fraction = static_cast<double>(infeasible) / n;
    row.mean_hops = hops.empty() ? 0.0 : pairwise_sum(hops) / static_cast<double>(hops.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace covroute
