#include "covroute/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "covroute/covert_metrics.hpp"
#include "covroute/error.hpp"
#include "covroute/io.hpp"
#include "covroute/routing.hpp"
#include "covroute/simharness.hpp"

namespace covroute {

namespace {

double rel_residual(double measured, double expected) {
  const double scale = std::max(std::abs(expected), std::abs(measured));
  return scale > 0.0 ? std::abs(measured - expected) / scale : 0.0;
}

MetricOptions plan_metric(const RoutePlan& plan) {
  MetricOptions m;
  m.adversary_mode = plan.adversary_mode;
  m.csi = plan.csi_variant;
  m.willie = plan.willie;
  m.extended = plan.extended_model;
  return m;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoFeasiblePath:
      return kExitInfeasible;
    default:
      return kExitValidation;
  }
}

void report_error(std::ostream& err, std::string_view code, const std::string& message) {
  nlohmann::json doc{{"error", std::string(code)}, {"message", message}};
  err << doc.dump() << '\n';
}

CovertBudget budget_with_overrides(const CovertBudget& base, const CliConfig& config) {
  if (!config.epsilon && !config.blocklength) return base;
  return CovertBudget::make(config.epsilon.value_or(base.epsilon),
                            config.blocklength.value_or(base.n));
}

void apply_metric_overrides(MetricOptions& metric, const CliConfig& config) {
  if (config.adversary_mode) metric.adversary_mode = parse_adversary_mode(*config.adversary_mode);
  if (config.csi) metric.csi = parse_csi_variant(*config.csi);
  if (config.willie) metric.willie = *config.willie;
  if (config.extended) metric.extended = true;
}

HopSemantics parse_hop_semantics(const std::string& text) {
  if (text == "widest") return HopSemantics::Widest;
  if (text == "additive") return HopSemantics::Additive;
  throw Error(ErrorCode::InvalidArgument, "unknown hop semantics '" + text + "'");
}

PlacementKind parse_placement(const std::string& text) {
  if (text == "random") return PlacementKind::Random;
  if (text == "intelligent") return PlacementKind::Intelligent;
  throw Error(ErrorCode::InvalidArgument, "unknown placement '" + text + "'");
}

std::filesystem::path summary_path_for(const std::filesystem::path& records) {
  std::filesystem::path p = records;
  p.replace_extension();
  p += ".summary.csv";
  return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  return os;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(ErrorCode::InvalidArgument, std::string(flag) + " is required");
  }
}

}  // namespace

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string VerificationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << "check " << c.name << ' ' << (c.pass ? "PASS" : "FAIL")
       << " measured=" << format_number(c.measured) << " expected=" << format_number(c.expected)
       << " residual=" << format_number(c.residual) << '\n';
  }
  for (std::size_t k = 0; k < exact_kl_per_adversary.size(); ++k) {
    os << "exact_kl adversary=" << k << " per_symbol=" << format_number(exact_kl_per_adversary[k])
       << '\n';
  }
  os << "end_to_end_divergence " << format_number(end_to_end_divergence) << '\n';
  os << "detection_error_lower_bound " << format_number(pinsker_lower_bound) << '\n';
  os << "result " << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

VerificationReport verify_plan(const NetworkInstance& net, const RoutePlan& plan) {
  VerificationReport report;
  auto add = [&](std::string name, double measured, double expected, bool pass) {
    report.checks.push_back(
        CheckResult{std::move(name), pass, measured, expected, rel_residual(measured, expected)});
  };

  try {
    validate_plan(net, plan);
  } catch (const Error&) {
    report.checks.push_back(CheckResult{"path", false, 0.0, 0.0, 1.0});
    return report;
  }
  report.checks.push_back(CheckResult{"path", true, 0.0, 0.0, 0.0});

  const MetricOptions metric = plan_metric(plan);
  const double delta = plan.budget.delta;

  std::vector<double> surrogates;
  double min_rate = WeightedGraph::kAbsent;
  for (std::size_t i = 0; i < plan.links.size(); ++i) {
    const PlannedLink& link = plan.links[i];
    const double s = covert_surrogate(net, link.src, link.powers, metric);
    surrogates.push_back(s);
    add("link" + std::to_string(i) + "_surrogate", s, link.delta,
        rel_residual(s, link.delta) <= kVerifyRelTol);

    // Modes no adversary can see do not count toward the covert rate.
    const auto a = destination_coefficients(net, link.src, link.dst);
    const auto b = adversary_coefficients(net, link.src, metric);
    double rate = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) {
      if (b[m] > 0.0) rate += a[m] * link.powers[m];
    }
    min_rate = std::min(min_rate, rate);
  }

  const double delta_sum = plan.delta_sum();
  add("delta_sum", delta_sum, delta, delta_sum <= delta * (1.0 + kVerifyRelTol));
  add("path_capacity", plan.path_capacity, min_rate,
      rel_residual(plan.path_capacity, min_rate) <= kVerifyRelTol);

  report.end_to_end_divergence = static_cast<double>(plan.budget.n) * pairwise_sum(surrogates);
  add("covertness", report.end_to_end_divergence, plan.budget.epsilon,
      report.end_to_end_divergence <= plan.budget.epsilon * (1.0 + kVerifyRelTol));
  report.pinsker_lower_bound = pinsker_bound(report.end_to_end_divergence);

  for (std::size_t k = 0; k < net.adversary_count(); ++k) {
    double kl = 0.0;
    for (const auto& link : plan.links) {
      kl += exact_kl_at_adversary(net, link.src, link.powers, k, plan.csi_variant);
    }
    report.exact_kl_per_adversary.push_back(kl);
  }
  return report;
}

int cmd_plan(const CliConfig& config, std::ostream& out, std::ostream&) {
  require(config.input, "--input");
  NetworkInstance net = load_network(config.input);
  if (config.alpha) net = net.with_alpha(*config.alpha);
  if (config.algorithms.size() > 1) {
    throw Error(ErrorCode::InvalidArgument, "plan takes exactly one algorithm");
  }
  const std::string algorithm = config.algorithms.empty() ? "het-opt" : config.algorithms.front();

  RoutingOptions opts;
  apply_metric_overrides(opts.metric, config);
  if (config.hop_semantics) opts.hop_semantics = parse_hop_semantics(*config.hop_semantics);
  if (config.max_hops) opts.max_hops = *config.max_hops;
  opts.threads = config.threads;

  const RoutePlan plan = plan_by_name(net, algorithm, budget_with_overrides({}, config), opts);
  if (config.output.empty()) {
    out << plan_to_json(plan).dump(2) << '\n';
  } else {
    write_json(config.output, plan_to_json(plan));
  }
  out << "capacity_nats " << format_number(plan.path_capacity) << '\n';
  out << "hops " << plan.hops() << '\n';
  return kExitOk;
}

int cmd_experiment(const CliConfig& config, std::ostream& out, std::ostream&) {
  require(config.input, "--input");
  ExperimentSpec spec = load_experiment(config.input);
  if (config.seed) spec.master_seed = *config.seed;
  spec.budget = budget_with_overrides(spec.budget, config);
  if (config.alpha) spec.alpha = {*config.alpha};
  if (config.adversaries) spec.n_adversaries = {*config.adversaries};
  if (config.placement) spec.placement.kind = parse_placement(*config.placement);
  if (config.min_dist) spec.placement.min_dist = *config.min_dist;
  apply_metric_overrides(spec.metric, config);
  if (config.hop_semantics) spec.hop_semantics = parse_hop_semantics(*config.hop_semantics);
  if (!config.algorithms.empty()) spec.algorithms = config.algorithms;
  if (config.max_hops) spec.max_hops = *config.max_hops;
  if (config.trials) spec.trials = *config.trials;
  spec.validate();

  std::ofstream file;
  std::ostream* records = &out;
  if (!config.output.empty()) {
    file = open_output(config.output);
    records = &file;
  }
  *records << kRecordHeader << '\n';
  auto sink = [&](std::span<const TrialRecord> batch) {
    for (const auto& rec : batch) *records << record_csv_row(rec) << '\n';
    records->flush();
  };
  const ExperimentResult result = run_experiment(spec, config.threads, sink);

  std::filesystem::path summary = config.summary;
  if (summary.empty() && !config.output.empty()) summary = summary_path_for(config.output);
  if (!summary.empty()) {
    std::ofstream os = open_output(summary);
    os << kSummaryHeader << '\n';
    for (const auto& row : result.summary) os << summary_csv_row(row) << '\n';
  }
  if (!config.output.empty()) {
    out << "records " << result.records.size() << '\n';
    out << "summary_rows " << result.summary.size() << '\n';
  }
  return kExitOk;
}

int cmd_verify(const CliConfig& config, std::ostream& out, std::ostream&) {
  require(config.input, "--input");
  require(config.network, "--network");
  const NetworkInstance net = load_network(config.network);
  const RoutePlan plan = load_plan(config.input);
  const VerificationReport report = verify_plan(net, plan);
  if (config.output.empty()) {
    out << report.to_text();
  } else {
    open_output(config.output) << report.to_text();
    out << "result " << (report.passed() ? "PASS" : "FAIL") << '\n';
  }
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

int cmd_export_graph(const CliConfig& config, std::ostream& out, std::ostream&) {
  require(config.input, "--input");
  require(config.network, "--network");
  const NetworkInstance net = load_network(config.network);
  const RoutePlan plan = load_plan(config.input);
  const std::string text = export_graph(net, plan);
  if (config.output.empty()) {
    out << text;
  } else {
    open_output(config.output) << text;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covert multi-modal routing planner and Monte Carlo simulator", "covroute"};
  app.require_subcommand(1);
  CliConfig config;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", config.input, "Input file")->required();
    sub->add_option("--output", config.output, "Output file (stdout if omitted)");
  };
  auto add_budget = [&](CLI::App* sub) {
    sub->add_option("--epsilon", config.epsilon, "End-to-end KL budget");
    sub->add_option("--blocklength", config.blocklength, "Symbols per codeword");
    sub->add_option("--alpha", config.alpha, "Path-loss exponent");
    sub->add_option("--adversary-mode", config.adversary_mode, "single or multi");
    sub->add_option("--willie", config.willie, "Adversary index in single mode");
    sub->add_flag("--extended", config.extended,
                  "Allow uncertain CSI with several adversaries");
    sub->add_option("--csi", config.csi, "known, linear-tau or squared-tau")
        ->check(CLI::IsMember({"known", "linear-tau", "squared-tau"}));
    sub->add_option("--max-hops", config.max_hops, "Hop limit for per-link-dep");
    sub->add_option("--hop-semantics", config.hop_semantics, "widest or additive")
        ->check(CLI::IsMember({"widest", "additive"}));
    sub->add_option("--algorithms", config.algorithms, "Comma-separated algorithm names")
        ->delimiter(',');
    sub->add_option("--threads", config.threads, "Worker threads")
        ->check(CLI::Range(1u, 1024u));
  };

  CLI::App* plan = app.add_subcommand("plan", "Compute a route plan for a network");
  add_common(plan);
  add_budget(plan);

  CLI::App* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  add_common(experiment);
  add_budget(experiment);
  experiment->add_option("--summary", config.summary, "Summary CSV path");
  experiment->add_option("--seed", config.seed, "Master seed");
  experiment->add_option("--adversaries", config.adversaries, "Adversary count")
      ->check(CLI::PositiveNumber);
  experiment->add_option("--placement", config.placement, "random or intelligent")
      ->check(CLI::IsMember({"random", "intelligent"}));
  experiment->add_option("--min-dist", config.min_dist, "Intelligent placement spacing");
  experiment->add_option("--trials", config.trials, "Trials per sweep point")
      ->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "Check a plan against its network");
  add_common(verify);
  verify->add_option("--network", config.network, "Network file")->required();

  CLI::App* export_cmd = app.add_subcommand("export-graph", "Write a graph description");
  add_common(export_cmd);
  export_cmd->add_option("--network", config.network, "Network file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    report_error(err, "UsageError", e.what());
    return kExitValidation;
  }

  try {
    if (plan->parsed()) {
      config.subcommand = Subcommand::Plan;
      return cmd_plan(config, out, err);
    }
    if (experiment->parsed()) {
      config.subcommand = Subcommand::Experiment;
      return cmd_experiment(config, out, err);
    }
    if (verify->parsed()) {
      config.subcommand = Subcommand::Verify;
      return cmd_verify(config, out, err);
    }
    config.subcommand = Subcommand::ExportGraph;
    return cmd_export_graph(config, out, err);
  } catch (const Error& e) {
    report_error(err, to_string(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error(err, "InternalError", e.what());
    return kExitValidation;
  }
}

}  // namespace covroute
