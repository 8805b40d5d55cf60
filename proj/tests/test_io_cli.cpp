#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "covroute/cli.hpp"
#include "covroute/error.hpp"
#include "covroute/io.hpp"
#include "covroute/routing.hpp"
#include "test_support.hpp"

using namespace covroute;
using namespace covroute::testing;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = COVROUTE_FIXTURES;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "covroute");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           (std::string("covroute_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST(NetworkJson, RoundTrip) {
  std::mt19937_64 rng(1);
  const auto net = random_network(rng, {.nodes = 4, .modes = 2, .adversaries = 2, .sigma_err = 0.2});
  const auto again = network_from_json(network_to_json(net));
  EXPECT_EQ(network_to_json(again), network_to_json(net));
  EXPECT_EQ(again.gain_table().adversary().size(), net.gain_table().adversary().size());
}

TEST(NetworkJson, Errors) {
  auto doc = read_json(kFixtures / "two_node.json");
  auto bad = doc;
  bad["colour"] = 1;
  EXPECT_THROW(network_from_json(bad), Error);
  bad = doc;
  bad["friendly_gains"][0]["mode"] = 2;
  EXPECT_THROW(network_from_json(bad), Error);
  bad = doc;
  bad["friendly_gains"].erase(1);
  try {
    network_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingGainEntry);
  }
  bad = doc;
  bad["alpha"] = "two";
  try {
    network_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(PlanJson, RoundTripIsLossless) {
  const auto net = load_network(kFixtures / "fifteen_node.json");
  const auto plan = het_opt(net, CovertBudget::make(0.02, 300));
  const auto back = plan_from_json(plan_to_json(plan));
  EXPECT_EQ(back.path_capacity, plan.path_capacity);
  ASSERT_EQ(back.links.size(), plan.links.size());
  for (std::size_t i = 0; i < plan.links.size(); ++i) {
    EXPECT_EQ(back.links[i].powers, plan.links[i].powers);
    EXPECT_EQ(back.links[i].delta, plan.links[i].delta);
  }
  EXPECT_EQ(back.budget.delta, plan.budget.delta);
  const auto j = plan_to_json(plan);
  for (const char* key : {"algorithm", "capacity_nats", "links", "budget", "adversary_mode",
                          "csi_variant"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(ExperimentJson, ParsesAllSections) {
  const auto doc = nlohmann::json::parse(R"({
    "experiment_id": "fig6",
    "region": {"width": 200, "height": 50},
    "n_nodes": [20],
    "n_adversaries": [1, 2, 3],
    "alpha": 4,
    "placement": {"kind": "intelligent", "min_dist": 30},
    "budget": {"epsilon": 0.02, "n": 400},
    "channel": {"modes": [{"kind": "constant", "g0": 2, "friendly_noise": [1, 2]},
                          {"kind": "rayleigh", "adversary_sigma_err": 0.5}]},
    "trials": 9,
    "master_seed": 77,
    "algorithms": ["het-opt", "mode-2"],
    "adversary_mode": "single",
    "csi_variant": "linear-tau",
    "hop_semantics": "additive",
    "max_hops": 6
  })");
  const auto spec = experiment_from_json(doc);
  EXPECT_EQ(spec.experiment_id, "fig6");
  EXPECT_EQ(spec.width, 200.0);
  EXPECT_EQ(spec.n_adversaries, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(spec.alpha, (std::vector<double>{4.0}));
  EXPECT_EQ(spec.placement.kind, PlacementKind::Intelligent);
  EXPECT_EQ(spec.placement.min_dist, 30.0);
  EXPECT_DOUBLE_EQ(spec.budget.delta, 5e-5);
  ASSERT_EQ(spec.channel.modes.size(), 2u);
  EXPECT_EQ(spec.channel.modes[0].g0, 2.0);
  EXPECT_EQ(spec.channel.modes[0].friendly_noise_high, 2.0);
  EXPECT_EQ(spec.channel.modes[1].kind, GainKind::Rayleigh);
  EXPECT_EQ(spec.channel.modes[1].adversary_sigma_err, 0.5);
  EXPECT_EQ(spec.trials, 9);
  EXPECT_EQ(spec.master_seed, 77u);
  EXPECT_EQ(spec.metric.adversary_mode, AdversaryMode::Single);
  EXPECT_EQ(spec.metric.csi, CsiVariant::LinearTau);
  EXPECT_EQ(spec.hop_semantics, HopSemantics::Additive);
  EXPECT_EQ(spec.max_hops, 6);
  EXPECT_NO_THROW(spec.validate());

  EXPECT_THROW(experiment_from_json(nlohmann::json::parse(R"({"trails": 3})")), Error);
}

TEST(Csv, RecordSchema) {
  EXPECT_STREQ(kRecordHeader,
               "experiment_id,sweep_key,sweep_value,trial,algorithm,n_nodes,n_adversaries,alpha,"
               "capacity_nats,hops,feasible,sub_seed");
  TrialRecord r;
  r.experiment_id = "e";
  r.sweep_key = "n_nodes";
  r.sweep_value = 15;
  r.trial = 3;
  r.algorithm = "het-opt";
  r.n_nodes = 15;
  r.n_adversaries = 1;
  r.alpha = 2;
  r.capacity = 0.1;
  r.hops = 4;
  r.feasible = true;
  r.sub_seed = 42;
  EXPECT_EQ(record_csv_row(r), "e,n_nodes,15,3,het-opt,15,1,2,0.10000000000000001,4,1,42");
}

TEST(ExportGraph, SingleLink) {
  const auto net = load_network(kFixtures / "two_node.json");
  const auto plan = het_opt(net, CovertBudget{});
  const auto lines = lines_of(export_graph(net, plan));
  int nodes = 0, edges = 0;
  for (const auto& l : lines) {
    if (l.rfind("node ", 0) == 0) ++nodes;
    if (l.rfind("edge ", 0) == 0) ++edges;
  }
  EXPECT_EQ(nodes, 2);
  EXPECT_EQ(edges, 1);
  EXPECT_EQ(lines.front(), "covroute-graph 1");
}

TEST(ExportGraph, FractionsNormalized) {
  const auto net = load_network(kFixtures / "fifteen_node.json");
  for (const char* algo : {"het-opt", "per-link-dep", "mode-1"}) {
    const auto plan = plan_by_name(net, algo, CovertBudget{});
    int edges = 0;
    for (const auto& l : lines_of(export_graph(net, plan))) {
      if (l.rfind("edge ", 0) != 0) continue;
      std::istringstream is(l.substr(5));
      NodeId s, d;
      double total;
      is >> s >> d >> total;
      const auto& link = plan.links[edges];
      EXPECT_EQ(s, link.src);
      EXPECT_EQ(d, link.dst);
      double frac_sum = 0.0, rebuilt = 0.0;
      for (int m = 0; m < net.num_modes(); ++m) {
        double f;
        is >> f;
        frac_sum += f;
        rebuilt += f * total;
      }
      double power = 0.0;
      for (double p : link.powers) power += p;
      EXPECT_NEAR(frac_sum, 1.0, 1e-9);
      EXPECT_LE(rel_diff(rebuilt, power), 1e-9);
      ++edges;
    }
    EXPECT_EQ(static_cast<std::size_t>(edges), plan.hops());
  }
}

TEST(ExportGraph, MismatchedNetworkRejected) {
  const auto big = load_network(kFixtures / "fifteen_node.json");
  const auto small = load_network(kFixtures / "two_node.json");
  EXPECT_THROW(export_graph(small, het_opt(big, CovertBudget{})), Error);
}

class Cli : public TempDir {};

TEST_F(Cli, PlanTwoNode) {
  const auto r = cli({"plan", "--input", (kFixtures / "two_node.json").string(), "--output",
                      path("plan.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("capacity_nats 0.0044721359549995"), std::string::npos);
  EXPECT_NE(r.out.find("hops 1"), std::string::npos);
  EXPECT_EQ(load_plan(path("plan.json")).hops(), 1u);
}

TEST_F(Cli, PlanUnreachableExitsThree) {
  const auto r = cli({"plan", "--input", (kFixtures / "unreachable.json").string()});
  EXPECT_EQ(r.code, kExitInfeasible);
  const auto err = nlohmann::json::parse(r.err);
  EXPECT_EQ(err["error"], "NoFeasiblePath");
}

TEST_F(Cli, ValidationErrorsExitTwo) {
  std::ofstream(path("broken.json")) << "{\"alpha\": 2";
  auto r = cli({"plan", "--input", path("broken.json")});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "ParseError");
  r = cli({"plan", "--input", (kFixtures / "two_node.json").string(), "--epsilon", "-1"});
  EXPECT_EQ(r.code, kExitValidation);
  r = cli({"plan", "--input", (kFixtures / "two_node.json").string(), "--algorithms", "mode-9"});
  EXPECT_EQ(r.code, kExitValidation);
  r = cli({"plan"});
  EXPECT_EQ(r.code, kExitValidation);
  r = cli({"teleport"});
  EXPECT_EQ(r.code, kExitValidation);
  r = cli({"plan", "--input", (kFixtures / "two_node.json").string(), "--csi", "psychic"});
  EXPECT_EQ(r.code, kExitValidation);
}

TEST_F(Cli, PlanVerifyExportChain) {
  const auto net = (kFixtures / "fifteen_node.json").string();
  for (const char* algo : {"het-opt", "per-link-dep", "mode-1", "mode-2"}) {
    auto r = cli({"plan", "--input", net, "--algorithms", algo, "--output", path("p.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli({"verify", "--input", path("p.json"), "--network", net});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("result PASS"), std::string::npos);
    r = cli({"export-graph", "--input", path("p.json"), "--network", net, "--output",
             path("g.txt")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("g.txt")).rfind("covroute-graph 1", 0), 0u);
  }
}

TEST_F(Cli, VerifyDetectsTampering) {
  const auto net = (kFixtures / "fifteen_node.json").string();
  ASSERT_EQ(cli({"plan", "--input", net, "--output", path("p.json")}).code, 0);
  auto doc = read_json(path("p.json"));
  doc["links"][0]["powers"][0] = 2.0 * doc["links"][0]["powers"][0].get<double>();
  write_json(path("t.json"), doc);
  const auto r = cli({"verify", "--input", path("t.json"), "--network", net});
  EXPECT_EQ(r.code, kExitVerifyFailed);
  EXPECT_NE(r.out.find("check link0_surrogate FAIL"), std::string::npos);
}

TEST_F(Cli, VerifyReportsPinskerBound) {
  const auto net = (kFixtures / "two_node.json").string();
  ASSERT_EQ(cli({"plan", "--input", net, "--epsilon", "0.01", "--output", path("p.json")}).code, 0);
  const auto plan = load_plan(path("p.json"));
  const auto report = verify_plan(load_network(net), plan);
  EXPECT_TRUE(report.passed());
  EXPECT_GE(report.pinsker_lower_bound, 0.5 - 0.5 * std::sqrt(0.01 / 2) - 1e-12);
  EXPECT_NEAR(report.pinsker_lower_bound, 0.4646, 1e-4);
  ASSERT_EQ(report.exact_kl_per_adversary.size(), 1u);
  EXPECT_LE(report.exact_kl_per_adversary[0], plan.budget.delta);
}

TEST_F(Cli, ExportGraphMismatchExitsTwo) {
  ASSERT_EQ(cli({"plan", "--input", (kFixtures / "fifteen_node.json").string(), "--output",
                 path("p.json")})
                .code,
            0);
  const auto r = cli({"export-graph", "--input", path("p.json"), "--network",
                      (kFixtures / "two_node.json").string()});
  EXPECT_EQ(r.code, kExitValidation);
}

TEST_F(Cli, PlanIsByteIdenticalAcrossRunsAndThreads) {
  const auto net = (kFixtures / "fifteen_node.json").string();
  ASSERT_EQ(cli({"plan", "--input", net, "--output", path("a.json")}).code, 0);
  ASSERT_EQ(cli({"plan", "--input", net, "--output", path("b.json"), "--threads", "4"}).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, ExperimentSmoke) {
  const auto r = cli({"experiment", "--input", (kFixtures / "smoke_experiment.json").string(),
                      "--output", path("rec.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rec = lines_of(slurp(path("rec.csv")));
  ASSERT_EQ(rec.size(), 5u);
  EXPECT_EQ(rec[0], kRecordHeader);
  EXPECT_EQ(rec[1].rfind("smoke,n_nodes,15,0,het-opt,", 0), 0u);
  const auto sum = lines_of(slurp(path("rec.summary.csv")));
  ASSERT_EQ(sum.size(), 5u);
  EXPECT_EQ(sum[0], kSummaryHeader);
}

TEST_F(Cli, ExperimentOverridesAndDeterminism) {
  const auto spec = (kFixtures / "sweep_experiment.json").string();
  ASSERT_EQ(cli({"experiment", "--input", spec, "--trials", "5", "--output", path("a.csv")}).code, 0);
  ASSERT_EQ(cli({"experiment", "--input", spec, "--trials", "5", "--threads", "3", "--output",
                 path("b.csv")})
                .code,
            0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.summary.csv")), slurp(path("b.summary.csv")));
  const auto sum = lines_of(slurp(path("a.summary.csv")));
  EXPECT_EQ(sum.size(), 1u + 6u * 4u);

  ASSERT_EQ(cli({"experiment", "--input", spec, "--trials", "2", "--seed", "9", "--adversaries",
                 "2", "--algorithms", "het-opt", "--output", path("c.csv")})
                .code,
            0);
  const auto rec = lines_of(slurp(path("c.csv")));
  ASSERT_EQ(rec.size(), 1u + 6u * 2u);
  EXPECT_NE(rec[1].find(",het-opt,10,2,"), std::string::npos);

  const auto bad = cli({"experiment", "--input", spec, "--algorithms", "mode-7"});
  EXPECT_EQ(bad.code, kExitValidation);
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string bin = COVROUTE_CLI;
  const auto run = [&](const std::string& args) {
    const int status = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("plan --input " + (kFixtures / "two_node.json").string() + " --output " +
                path("p.json")),
            0);
  EXPECT_EQ(run("plan --input " + (kFixtures / "unreachable.json").string()), 3);
  EXPECT_EQ(run("plan --input " + path("missing.json")), 2);
}
