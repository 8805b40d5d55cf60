#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "covroute/model.hpp"

namespace covroute {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitVerifyFailed = 4;

enum class Subcommand { Plan, Experiment, Verify, ExportGraph };

/// Parsed command line. Unset optionals fall back to file values, then defaults.
struct CliConfig {
  Subcommand subcommand = Subcommand::Plan;
  std::string input;
  std::string output;
  std::string network;  // verify / export-graph
  std::string summary;  // experiment summary CSV; derived from output if empty
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<std::int64_t> blocklength;
  std::optional<double> alpha;
  std::optional<int> adversaries;
  std::optional<std::string> adversary_mode;
  std::optional<std::size_t> willie;
  bool extended = false;
  std::optional<std::string> placement;
  std::optional<double> min_dist;
  std::optional<std::string> csi;
  std::optional<std::string> hop_semantics;
  std::vector<std::string> algorithms;
  std::optional<int> max_hops;
  std::optional<int> trials;
  unsigned threads = 1;
};

struct CheckResult {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double expected = 0.0;
  double residual = 0.0;  // relative unless noted
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::vector<double> exact_kl_per_adversary;  // per symbol, summed over links
  double end_to_end_divergence = 0.0;          // n * sum of link surrogates
  double pinsker_lower_bound = 0.0;

  bool passed() const;
  std::string to_text() const;
};

inline constexpr double kVerifyRelTol = 1e-9;

/// Recomputes every covertness and capacity invariant of a plan.
VerificationReport verify_plan(const NetworkInstance& net, const RoutePlan& plan);

int cmd_plan(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_experiment(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_export_graph(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covroute
