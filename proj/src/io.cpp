#include "covroute/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "covroute/error.hpp"
#include "covroute/random.hpp"

namespace covroute {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

const json& field(const json& obj, const char* key) {
  if (!obj.is_object()) parse_error(std::string("expected an object holding '") + key + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) parse_error(std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& v, const char* what) {
  if (!v.is_number()) parse_error(std::string("'") + what + "' must be a number");
  return v.get<double>();
}

long long integer(const json& v, const char* what) {
  if (!v.is_number_integer()) parse_error(std::string("'") + what + "' must be an integer");
  return v.get<long long>();
}

std::string text(const json& v, const char* what) {
  if (!v.is_string()) parse_error(std::string("'") + what + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const char* what) {
  if (!v.is_array()) parse_error(std::string("'") + what + "' must be an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(number(e, what));
  return out;
}

// Accepts a scalar or a list.
std::vector<double> number_list(const json& v, const char* what) {
  if (v.is_array()) return numbers(v, what);
  return {number(v, what)};
}

std::vector<int> int_list(const json& v, const char* what) {
  std::vector<int> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(static_cast<int>(integer(e, what)));
  } else {
    out.push_back(static_cast<int>(integer(v, what)));
  }
  return out;
}

Position position(const json& v, const char* what) {
  const auto xy = numbers(v, what);
  if (xy.size() != 2) parse_error(std::string("'") + what + "' must be [x, y]");
  return {xy[0], xy[1]};
}

int mode_index(const json& entry, int modes) {
  const long long m = integer(field(entry, "mode"), "mode");
  if (m < 1 || m > modes) {
    parse_error("gain entry mode " + std::to_string(m) + " outside 1.." + std::to_string(modes));
  }
  return static_cast<int>(m - 1);
}

template <typename Entity>
std::vector<Entity> entities(const json& list, const char* what) {
  if (!list.is_array()) parse_error(std::string("'") + what + "' must be an array");
  std::vector<Entity> out;
  for (const auto& e : list) {
    Entity ent;
    ent.id = static_cast<NodeId>(integer(field(e, "id"), "id"));
    ent.pos = {number(field(e, "x"), "x"), number(field(e, "y"), "y")};
    ent.noise_var = numbers(field(e, "noise_var"), "noise_var");
    out.push_back(std::move(ent));
  }
  return out;
}

template <typename Entity>
json entity_json(const Entity& e) {
  return json{{"id", e.id}, {"x", e.pos.x}, {"y", e.pos.y}, {"noise_var", e.noise_var}};
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const char* what) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) parse_error(std::string("unknown key '") + key + "' in " + what);
  }
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
}

ModeChannel mode_channel_from_json(const json& doc) {
  reject_unknown_keys(doc,
                      {"kind", "g0", "friendly_noise", "adversary_noise", "adversary_sigma_err"},
                      "channel mode");
  ModeChannel mc;
  const std::string kind = text(field(doc, "kind"), "kind");
  if (kind == "constant") {
    mc.kind = GainKind::Constant;
  } else if (kind == "rayleigh") {
    mc.kind = GainKind::Rayleigh;
  } else {
    parse_error("channel kind must be 'constant' or 'rayleigh'");
  }
  if (doc.contains("g0")) mc.g0 = number(doc["g0"], "g0");
  if (doc.contains("friendly_noise")) {
    const auto range = number_list(doc["friendly_noise"], "friendly_noise");
    if (range.size() == 1) {
      mc.friendly_noise_low = mc.friendly_noise_high = range[0];
    } else if (range.size() == 2) {
      mc.friendly_noise_low = range[0];
      mc.friendly_noise_high = range[1];
    } else {
      parse_error("'friendly_noise' must be a value or [low, high]");
    }
  }
  if (doc.contains("adversary_noise")) mc.adversary_noise = number(doc["adversary_noise"], "adversary_noise");
  if (doc.contains("adversary_sigma_err")) {
    mc.adversary_sigma_err = number(doc["adversary_sigma_err"], "adversary_sigma_err");
  }
  return mc;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

NetworkInstance network_from_json(const json& doc) {
  return guarded([&] {
    reject_unknown_keys(doc,
                        {"alpha", "num_modes", "source", "dest", "nodes", "adversaries",
                         "friendly_gains", "adversary_gains"},
                        "network");
    const double alpha = number(field(doc, "alpha"), "alpha");
    const long long modes = integer(field(doc, "num_modes"), "num_modes");
    if (modes < 1) parse_error("'num_modes' must be >= 1");
    auto nodes = entities<FriendlyNode>(field(doc, "nodes"), "nodes");
    auto adversaries = entities<Adversary>(field(doc, "adversaries"), "adversaries");
    for (const auto& n : nodes) {
      if (n.noise_var.size() != static_cast<std::size_t>(modes)) {
        throw Error(ErrorCode::InvalidArgument, "node noise_var length differs from num_modes");
      }
    }

    GainTable gains;
    const int m_count = static_cast<int>(modes);
    const auto& fg = field(doc, "friendly_gains");
    if (!fg.is_array()) parse_error("'friendly_gains' must be an array");
    for (const auto& e : fg) {
      gains.set_friendly(static_cast<NodeId>(integer(field(e, "src"), "src")),
                         static_cast<NodeId>(integer(field(e, "dst"), "dst")),
                         mode_index(e, m_count), number(field(e, "g"), "g"));
    }
    const auto& ag = field(doc, "adversary_gains");
    if (!ag.is_array()) parse_error("'adversary_gains' must be an array");
    for (const auto& e : ag) {
      CsiEntry entry;
      if (e.contains("g")) {
        if (e.contains("v") || e.contains("sigma_err")) {
          parse_error("adversary gain entry must carry either 'g' or 'v' + 'sigma_err'");
        }
        entry = KnownGain{number(e["g"], "g")};
      } else {
        entry = RicianGain{number(field(e, "v"), "v"), number(field(e, "sigma_err"), "sigma_err")};
      }
      gains.set_adversary(static_cast<NodeId>(integer(field(e, "src"), "src")),
                          static_cast<NodeId>(integer(field(e, "adv"), "adv")),
                          mode_index(e, m_count), entry);
    }
    return NetworkInstance::build(std::move(nodes), std::move(adversaries), gains, alpha,
                                  static_cast<NodeId>(integer(field(doc, "source"), "source")),
                                  static_cast<NodeId>(integer(field(doc, "dest"), "dest")));
  });
}

json network_to_json(const NetworkInstance& net) {
  json doc;
  doc["alpha"] = net.alpha();
  doc["num_modes"] = net.num_modes();
  doc["source"] = net.source();
  doc["dest"] = net.dest();
  doc["nodes"] = json::array();
  for (const auto& n : net.nodes()) doc["nodes"].push_back(entity_json(n));
  doc["adversaries"] = json::array();
  for (const auto& a : net.adversaries()) doc["adversaries"].push_back(entity_json(a));

  const GainTable table = net.gain_table();
  doc["friendly_gains"] = json::array();
  for (const auto& [key, g] : table.friendly()) {
    const auto [s, d, m] = key;
    doc["friendly_gains"].push_back(json{{"src", s}, {"dst", d}, {"mode", m + 1}, {"g", g}});
  }
  doc["adversary_gains"] = json::array();
  for (const auto& [key, entry] : table.adversary()) {
    const auto [s, w, m] = key;
    json e{{"src", s}, {"adv", w}, {"mode", m + 1}};
    if (const auto* k = std::get_if<KnownGain>(&entry)) {
      e["g"] = k->g;
    } else {
      const auto& r = std::get<RicianGain>(entry);
      e["v"] = r.v;
      e["sigma_err"] = r.sigma_err;
    }
    doc["adversary_gains"].push_back(std::move(e));
  }
  return doc;
}

NetworkInstance load_network(const std::filesystem::path& path) {
  return network_from_json(read_json(path));
}

json plan_to_json(const RoutePlan& plan) {
  json doc;
  doc["algorithm"] = plan.algorithm;
  doc["capacity_nats"] = plan.path_capacity;
  doc["hops"] = plan.hops();
  doc["budget"] = json{{"epsilon", plan.budget.epsilon},
                       {"n", plan.budget.n},
                       {"delta", plan.budget.delta}};
  doc["adversary_mode"] = to_string(plan.adversary_mode);
  doc["csi_variant"] = to_string(plan.csi_variant);
  if (plan.adversary_mode == AdversaryMode::Single) doc["willie"] = plan.willie;
  if (plan.extended_model) doc["extended"] = true;
  doc["links"] = json::array();
  for (const auto& l : plan.links) {
    doc["links"].push_back(
        json{{"src", l.src}, {"dst", l.dst}, {"delta_i", l.delta}, {"powers", l.powers}});
  }
  return doc;
}

RoutePlan plan_from_json(const json& doc) {
  return guarded([&] {
    reject_unknown_keys(doc,
                        {"algorithm", "capacity_nats", "hops", "budget", "adversary_mode",
                         "csi_variant", "willie", "extended", "links"},
                        "plan");
    RoutePlan plan;
    plan.algorithm = text(field(doc, "algorithm"), "algorithm");
    plan.path_capacity = number(field(doc, "capacity_nats"), "capacity_nats");
    const auto& b = field(doc, "budget");
    plan.budget = CovertBudget::make(number(field(b, "epsilon"), "epsilon"),
                                     integer(field(b, "n"), "n"));
    plan.adversary_mode = parse_adversary_mode(text(field(doc, "adversary_mode"), "adversary_mode"));
    plan.csi_variant = parse_csi_variant(text(field(doc, "csi_variant"), "csi_variant"));
    if (doc.contains("willie")) {
      const long long w = integer(doc["willie"], "willie");
      if (w < 0) parse_error("'willie' must be >= 0");
      plan.willie = static_cast<std::size_t>(w);
    }
    if (doc.contains("extended")) {
      if (!doc["extended"].is_boolean()) parse_error("'extended' must be a boolean");
      plan.extended_model = doc["extended"].get<bool>();
    }
    const auto& links = field(doc, "links");
    if (!links.is_array()) parse_error("'links' must be an array");
    for (const auto& l : links) {
      plan.links.push_back(PlannedLink{static_cast<NodeId>(integer(field(l, "src"), "src")),
                                       static_cast<NodeId>(integer(field(l, "dst"), "dst")),
                                       number(field(l, "delta_i"), "delta_i"),
                                       numbers(field(l, "powers"), "powers")});
    }
    if (doc.contains("hops") &&
        integer(doc["hops"], "hops") != static_cast<long long>(plan.links.size())) {
      parse_error("'hops' does not match the number of links");
    }
    return plan;
  });
}

RoutePlan load_plan(const std::filesystem::path& path) { return plan_from_json(read_json(path)); }

ExperimentSpec experiment_from_json(const json& doc) {
  return guarded([&] {
    reject_unknown_keys(
        doc,
        {"experiment_id", "region", "source", "dest", "n_nodes", "n_adversaries", "alpha",
         "placement", "min_dist", "budget", "channel", "trials", "master_seed", "algorithms",
         "adversary_mode", "csi_variant", "extended", "free_mode_power_cap", "hop_semantics",
         "max_hops", "geometry_overrides"},
        "experiment spec");
    ExperimentSpec spec;
    if (doc.contains("experiment_id")) {
      spec.experiment_id = text(doc["experiment_id"], "experiment_id");
    } else {
      // Stable content hash so records stay attributable to their spec.
      std::uint64_t h = 0;
      for (unsigned char c : doc.dump()) h = mix64(h ^ c);
      char buf[24];
      std::snprintf(buf, sizeof buf, "spec-%016llx", static_cast<unsigned long long>(h));
      spec.experiment_id = buf;
    }
    if (doc.contains("region")) {
      const auto& r = doc["region"];
      spec.width = number(field(r, "width"), "width");
      spec.height = number(field(r, "height"), "height");
    }
    if (doc.contains("source")) spec.source_pos = position(doc["source"], "source");
    if (doc.contains("dest")) spec.dest_pos = position(doc["dest"], "dest");
    if (doc.contains("n_nodes")) spec.n_nodes = int_list(doc["n_nodes"], "n_nodes");
    if (doc.contains("n_adversaries")) {
      spec.n_adversaries = int_list(doc["n_adversaries"], "n_adversaries");
    }
    if (doc.contains("alpha")) spec.alpha = number_list(doc["alpha"], "alpha");
    if (doc.contains("placement")) {
      const auto& p = doc["placement"];
      std::string kind;
      if (p.is_string()) {
        kind = p.get<std::string>();
      } else {
        reject_unknown_keys(p, {"kind", "min_dist", "max_retries"}, "placement");
        kind = text(field(p, "kind"), "kind");
        if (p.contains("min_dist")) spec.placement.min_dist = number(p["min_dist"], "min_dist");
        if (p.contains("max_retries")) {
          spec.placement.max_retries = static_cast<int>(integer(p["max_retries"], "max_retries"));
        }
      }
      if (kind == "random") {
        spec.placement.kind = PlacementKind::Random;
      } else if (kind == "intelligent") {
        spec.placement.kind = PlacementKind::Intelligent;
      } else {
        parse_error("placement must be 'random' or 'intelligent'");
      }
    }
    if (doc.contains("min_dist")) spec.placement.min_dist = number(doc["min_dist"], "min_dist");
    if (doc.contains("budget")) {
      const auto& b = doc["budget"];
      spec.budget = CovertBudget::make(number(field(b, "epsilon"), "epsilon"),
                                       integer(field(b, "n"), "n"));
    }
    if (doc.contains("channel")) {
      const auto& modes = field(doc["channel"], "modes");
      if (!modes.is_array()) parse_error("'channel.modes' must be an array");
      spec.channel.modes.clear();
      for (const auto& m : modes) spec.channel.modes.push_back(mode_channel_from_json(m));
    }
    if (doc.contains("trials")) spec.trials = static_cast<int>(integer(doc["trials"], "trials"));
    if (doc.contains("master_seed")) {
      const auto& s = doc["master_seed"];
      if (!s.is_number_integer()) parse_error("'master_seed' must be an integer");
      spec.master_seed = s.is_number_unsigned() ? s.get<std::uint64_t>()
                                                : static_cast<std::uint64_t>(s.get<long long>());
    }
    if (doc.contains("algorithms")) {
      const auto& a = doc["algorithms"];
      if (!a.is_array()) parse_error("'algorithms' must be an array");
      spec.algorithms.clear();
      for (const auto& name : a) spec.algorithms.push_back(text(name, "algorithms"));
    }
    if (doc.contains("adversary_mode")) {
      spec.metric.adversary_mode = parse_adversary_mode(text(doc["adversary_mode"], "adversary_mode"));
    }
    if (doc.contains("csi_variant")) {
      spec.metric.csi = parse_csi_variant(text(doc["csi_variant"], "csi_variant"));
    }
    if (doc.contains("extended")) {
      if (!doc["extended"].is_boolean()) parse_error("'extended' must be a boolean");
      spec.metric.extended = doc["extended"].get<bool>();
    }
    if (doc.contains("free_mode_power_cap")) {
      spec.metric.free_mode_power_cap = number(doc["free_mode_power_cap"], "free_mode_power_cap");
    }
    if (doc.contains("hop_semantics")) {
      const std::string s = text(doc["hop_semantics"], "hop_semantics");
      if (s == "widest") {
        spec.hop_semantics = HopSemantics::Widest;
      } else if (s == "additive") {
        spec.hop_semantics = HopSemantics::Additive;
      } else {
        parse_error("hop_semantics must be 'widest' or 'additive'");
      }
    }
    if (doc.contains("max_hops")) spec.max_hops = static_cast<int>(integer(doc["max_hops"], "max_hops"));
    if (doc.contains("geometry_overrides")) {
      const auto& g = doc["geometry_overrides"];
      reject_unknown_keys(g, {"sweep", "distances", "dest_radius", "source"}, "geometry_overrides");
      const std::string sweep = text(field(g, "sweep"), "sweep");
      if (sweep == "sd_distance") {
        spec.geometry.mode = GeometryMode::SdDistance;
      } else if (sweep == "sw_distance") {
        spec.geometry.mode = GeometryMode::SwDistance;
      } else {
        parse_error("geometry sweep must be 'sd_distance' or 'sw_distance'");
      }
      spec.geometry.distances = numbers(field(g, "distances"), "distances");
      if (g.contains("dest_radius")) spec.geometry.dest_radius = number(g["dest_radius"], "dest_radius");
      if (g.contains("source")) spec.geometry.source = position(g["source"], "source");
    }
    return spec;
  });
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  return experiment_from_json(read_json(path));
}

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string record_csv_row(const TrialRecord& r) {
  std::ostringstream os;
  os << r.experiment_id << ',' << r.sweep_key << ',' << format_number(r.sweep_value) << ','
     << r.trial << ',' << r.algorithm << ',' << r.n_nodes << ',' << r.n_adversaries << ','
     << format_number(r.alpha) << ',' << format_number(r.capacity) << ',' << r.hops << ','
     << (r.feasible ? 1 : 0) << ',' << r.sub_seed;
  return os.str();
}

std::string summary_csv_row(const SummaryRow& r) {
  std::ostringstream os;
  os << r.experiment_id << ',' << r.sweep_key << ',' << format_number(r.sweep_value) << ','
     << r.algorithm << ',' << r.trials << ',' << format_number(r.mean_capacity) << ','
     << format_number(r.stderr_capacity) << ',' << format_number(r.infeasible_fraction) << ','
     << format_number(r.mean_hops);
  return os.str();
}

std::string export_graph(const NetworkInstance& net, const RoutePlan& plan) {
  validate_plan(net, plan);
  std::ostringstream os;
  os << "covroute-graph 1\n";
  os << "modes " << net.num_modes() << '\n';
  os << "algorithm " << plan.algorithm << '\n';
  os << "capacity " << format_number(plan.path_capacity) << '\n';
  for (const auto& n : net.nodes()) {
    const char* role = n.id == net.source() ? "source" : n.id == net.dest() ? "dest" : "relay";
    os << "node " << n.id << ' ' << format_number(n.pos.x) << ' ' << format_number(n.pos.y) << ' '
       << role << '\n';
  }
  for (const auto& a : net.adversaries()) {
    os << "adversary " << a.id << ' ' << format_number(a.pos.x) << ' ' << format_number(a.pos.y)
       << '\n';
  }
  for (const auto& l : plan.links) {
    double total = 0.0;
    for (double p : l.powers) total += p;
    os << "edge " << l.src << ' ' << l.dst << ' ' << format_number(total);
    for (double p : l.powers) os << ' ' << format_number(total > 0.0 ? p / total : 0.0);
    os << '\n';
  }
  return os.str();
}

}  // namespace covroute
