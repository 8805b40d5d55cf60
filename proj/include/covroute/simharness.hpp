#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covroute/channels.hpp"
#include "covroute/covert_budget.hpp"
#include "covroute/model.hpp"
#include "covroute/routing.hpp"

namespace covroute {

enum class PlacementKind { Random, Intelligent };

struct Placement {
  PlacementKind kind = PlacementKind::Random;
  double min_dist = 25.0;        // Intelligent only
  int max_retries = 10000;       // draws per adversary before giving up
};

enum class GeometryMode {
  None,
  SdDistance,  // destination on a circle of swept radius around the source
  SwDistance,  // adversaries on a circle of swept radius around the source
};

struct GeometryOverrides {
  GeometryMode mode = GeometryMode::None;
  std::vector<double> distances;
  /// Destination radius while the adversary distance is swept.
  double dest_radius = 50.0;
  /// Source position; defaults to ExperimentSpec::source_pos.
  std::optional<Position> source;
};

struct ExperimentSpec {
  std::string experiment_id = "experiment";
  double width = 100.0;
  double height = 100.0;
  Position source_pos{1.0, 1.0};
  Position dest_pos{99.0, 99.0};
  std::vector<int> n_nodes{15};
  std::vector<int> n_adversaries{1};
  std::vector<double> alpha{2.0};
  Placement placement;
  CovertBudget budget = CovertBudget::make(0.01, 500);
  ChannelSpec channel = ChannelSpec::two_mode_default();
  int trials = 1;
  std::uint64_t master_seed = 1;
  std::vector<std::string> algorithms{"het-opt", "per-link-dep", "mode-1", "mode-2"};
  MetricOptions metric;
  HopSemantics hop_semantics = HopSemantics::Widest;
  int max_hops = 10;
  GeometryOverrides geometry;

  /// Throws InvalidArgument (or CoLocatedEntities for a zero swept radius).
  void validate() const;
};

/// One combination of sweep parameters.
struct SweepPoint {
  int n_nodes = 2;
  int n_adversaries = 1;
  double alpha = 2.0;
  double radius = 0.0;  // geometry sweeps only
  double value = 0.0;   // value of the swept variable
};

/// Name of the swept variable: n_nodes, n_adversaries, alpha, sd_distance or sw_distance.
std::string sweep_key(const ExperimentSpec& spec);
std::vector<SweepPoint> sweep_points(const ExperimentSpec& spec);

struct TrialRecord {
  std::string experiment_id;
  std::string sweep_key;
  double sweep_value = 0.0;
  int trial = 0;
  std::string algorithm;
  int n_nodes = 0;
  int n_adversaries = 0;
  double alpha = 0.0;
  double capacity = 0.0;  // nats per symbol, 0 when infeasible
  int hops = 0;
  bool feasible = false;
  std::uint64_t sub_seed = 0;
};

struct SummaryRow {
  std::string experiment_id;
  std::string sweep_key;
  double sweep_value = 0.0;
  std::string algorithm;
  int trials = 0;
  double mean_capacity = 0.0;
  double stderr_capacity = 0.0;
  double infeasible_fraction = 0.0;
  double mean_hops = 0.0;  // over feasible trials
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::vector<SummaryRow> summary;
};

/// Per-trial seed. Every sweep point reuses the trial's draws (common random
/// numbers), so sweeps compare the same underlying networks.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial_index);

/// Source is id 0, destination id 1, relays 2..N-1; adversary ids 0..K-1.
NetworkInstance generate_network(const ExperimentSpec& spec, const SweepPoint& point,
                                 std::size_t trial_index);
/// Uses the first sweep point.
NetworkInstance generate_network(const ExperimentSpec& spec, std::size_t trial_index);

/// Adversary positions for a trial. `avoid` lists positions that must not be hit.
std::vector<Position> place_adversaries(const ExperimentSpec& spec, int count,
                                        std::uint64_t sub_seed,
                                        std::span<const Position> avoid = {});
std::vector<Position> place_adversaries(const ExperimentSpec& spec, std::size_t trial_index);

/// Runs one named algorithm; infeasible routes score zero.
TrialRecord run_algorithm(const NetworkInstance& net, const ExperimentSpec& spec,
                          const std::string& algorithm);

using RecordSink = std::function<void(std::span<const TrialRecord>)>;

/// Records come out ordered by (sweep point, trial, algorithm) whatever the
/// thread count; `sink` receives them batch by batch as they complete.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 1,
                                const RecordSink& sink = {});

/// run_experiment on two-node networks; requires a geometry sweep.
ExperimentResult single_link_study(const ExperimentSpec& spec, unsigned threads = 1,
                                   const RecordSink& sink = {});

std::vector<SummaryRow> summarize(std::span<const TrialRecord> records);

/// Pairwise summation; result independent of how the input was produced.
double pairwise_sum(std::span<const double> values);

}  // namespace covroute
