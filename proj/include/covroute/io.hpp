#pragma once

#include <cstdio>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "covroute/model.hpp"
#include "covroute/simharness.hpp"

namespace covroute {

// All loaders throw Error(ParseError) on malformed input and forward
// validation errors from the domain constructors unchanged. Modes are
// numbered from 1 in every file format.

NetworkInstance network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const NetworkInstance& net);
NetworkInstance load_network(const std::filesystem::path& path);

nlohmann::json plan_to_json(const RoutePlan& plan);
RoutePlan plan_from_json(const nlohmann::json& doc);
RoutePlan load_plan(const std::filesystem::path& path);

ExperimentSpec experiment_from_json(const nlohmann::json& doc);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Reads and parses a JSON file.
nlohmann::json read_json(const std::filesystem::path& path);
/// Pretty-printed JSON followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// printf "%.17g": round-trips every double.
std::string format_number(double value);

inline constexpr const char* kRecordHeader =
    "experiment_id,sweep_key,sweep_value,trial,algorithm,n_nodes,n_adversaries,alpha,"
    "capacity_nats,hops,feasible,sub_seed";
inline constexpr const char* kSummaryHeader =
    "experiment_id,sweep_key,sweep_value,algorithm,trials,mean_capacity_nats,"
    "stderr_capacity_nats,infeasible_fraction,mean_hops";

std::string record_csv_row(const TrialRecord& rec);
std::string summary_csv_row(const SummaryRow& row);

/// Plain-text route description: node/adversary positions plus, per edge,
/// total power and per-mode power fractions.
std::string export_graph(const NetworkInstance& net, const RoutePlan& plan);

}  // namespace covroute
