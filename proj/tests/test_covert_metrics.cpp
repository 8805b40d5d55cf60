#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "covroute/covert_metrics.hpp"
#include "covroute/error.hpp"
#include "test_support.hpp"

using namespace covroute;
using namespace covroute::testing;

namespace {

struct LinkSetup {
  double d_sd = 1.0;
  double d_sw = 1.0;
  std::vector<double> g_sd{1.0};
  std::vector<CsiEntry> g_sw{KnownGain{1.0}};
  int extra_adversaries = 0;  // copies of the first adversary, mirrored across the source
};

// Source at the origin, destination on +x, adversaries on the circle of radius d_sw.
NetworkInstance make_link(const LinkSetup& s) {
  const std::size_t modes = s.g_sd.size();
  const std::vector<double> unit(modes, 1.0);
  std::vector<FriendlyNode> nodes{{0, {0, 0}, unit}, {1, {s.d_sd, 0}, unit}};
  std::vector<Adversary> advs{{0, {0, s.d_sw}, unit}};
  if (s.extra_adversaries >= 1) advs.push_back({1, {0, -s.d_sw}, unit});
  if (s.extra_adversaries >= 2) advs.push_back({2, {-s.d_sw, 0}, unit});
  GainTable t;
  for (int m = 0; m < static_cast<int>(modes); ++m) {
    t.set_friendly(0, 1, m, s.g_sd[m]);
    t.set_friendly(1, 0, m, s.g_sd[m]);
    for (const auto& a : advs) {
      t.set_adversary(0, a.id, m, s.g_sw[m]);
      t.set_adversary(1, a.id, m, s.g_sw[m]);
    }
  }
  return NetworkInstance::build(nodes, advs, t, 2.0, 0, 1);
}

MetricOptions single() {
  MetricOptions o;
  o.adversary_mode = AdversaryMode::Single;
  return o;
}

}  // namespace

TEST(PerSymbolDelta, Examples) {
  EXPECT_DOUBLE_EQ(per_symbol_delta(0.01, 500), 2e-5);
  EXPECT_DOUBLE_EQ(per_symbol_delta(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(per_symbol_delta(0.5, 250), 2e-3);
  EXPECT_THROW(per_symbol_delta(-1, 3), Error);
}

TEST(LinkGamma, IdentityParameters) {
  const auto net = make_link({});
  EXPECT_DOUBLE_EQ(link_gamma_single(net, 0, 1, 0).gamma, 1.0);
  EXPECT_DOUBLE_EQ(link_gamma_multi(net, 0, 1).gamma, 1.0);
}

TEST(LinkGamma, DistanceRatio) {
  const auto net = make_link({.d_sd = 2.0, .d_sw = 4.0});
  EXPECT_DOUBLE_EQ(link_gamma_single(net, 0, 1, 0).gamma, 16.0);
}

TEST(LinkGamma, UnobservedModeIsFree) {
  const auto net = make_link({.g_sd = {1.0, 1.0}, .g_sw = {KnownGain{1.0}, KnownGain{0.0}}});
  const auto m = link_gamma_single(net, 0, 1, 0);
  EXPECT_DOUBLE_EQ(m.gamma, 1.0);
  EXPECT_TRUE(m.has_free_modes());
  const auto p = optimal_mode_powers(m, 2e-5);
  EXPECT_DOUBLE_EQ(p[0], std::sqrt(2e-5));
  EXPECT_DOUBLE_EQ(p[1], 1.0);
  EXPECT_DOUBLE_EQ(covert_surrogate(net, 0, p, single()), 2e-5);
}

TEST(LinkGamma, TwoIdenticalAdversaries) {
  // Both adversaries sit at distance 1, so the inner sum doubles.
  const auto net = make_link({.extra_adversaries = 1});
  EXPECT_DOUBLE_EQ(link_gamma_multi(net, 0, 1).gamma, 0.25);
}

TEST(LinkGamma, UncertainCsi) {
  const auto net = make_link({.g_sw = {RicianGain{0.0, 1.0}}});
  EXPECT_DOUBLE_EQ(link_gamma_uncertain(net, 0, 1, 0, CsiVariant::LinearTau).gamma, 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(link_gamma_uncertain(net, 0, 1, 0, CsiVariant::SquaredTau).gamma, 1.0 / 64.0);
  EXPECT_THROW(link_gamma_uncertain(net, 0, 1, 0, CsiVariant::Known), Error);

  const auto exact = make_link({.g_sw = {RicianGain{0.7, 0.0}}});
  const auto known = make_link({.g_sw = {KnownGain{0.7}}});
  EXPECT_EQ(link_gamma_uncertain(exact, 0, 1, 0, CsiVariant::LinearTau).gamma,
            link_gamma_single(known, 0, 1, 0).gamma);
}

TEST(LinkGamma, UncertainWithSeveralAdversariesNeedsExtendedFlag) {
  const auto net = make_link({.g_sw = {RicianGain{0.5, 0.2}}, .extra_adversaries = 1});
  MetricOptions o;
  o.csi = CsiVariant::LinearTau;
  EXPECT_THROW(link_metric(net, 0, 1, o), Error);
  o.extended = true;
  const auto m = link_metric(net, 0, 1, o);
  const double b = 2.0 * std::sqrt(ref_tau(0.5, 0.2));
  EXPECT_NEAR(m.gamma, 1.0 / (b * b), 1e-12);
}

TEST(LinkGamma, MoreAdversariesNeverHelp) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = random_network(rng, {.nodes = 3, .modes = 3, .adversaries = 4});
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 4; ++k) {
      std::vector<std::size_t> advs;
      for (std::size_t j = 0; j < k; ++j) advs.push_back(j);
      const double g = ref_link_gamma(net, 0, 1, advs);
      EXPECT_LE(g, prev);
      prev = g;
    }
    EXPECT_NEAR(link_gamma_multi(net, 0, 1).gamma, prev, 1e-12 * prev);
  }
}

TEST(LinkGamma, MatchesReferenceOnRandomLinks) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto net = random_network(rng, {.nodes = 2, .modes = 1 + trial % 4, .adversaries = 3,
                                          .alpha = 2.0 + (trial % 3)});
    EXPECT_LE(rel_diff(link_gamma_multi(net, 0, 1).gamma, ref_link_gamma(net, 0, 1, {0, 1, 2})),
              1e-12);
    EXPECT_LE(rel_diff(link_gamma_single(net, 1, 0, 2).gamma, ref_link_gamma(net, 1, 0, {2})),
              1e-12);
  }
}

TEST(LinkGamma, JointDistanceScalingKeepsGamma) {
  for (double c : {0.5, 3.0, 17.0}) {
    const auto net = make_link({.d_sd = 2.0 * c, .d_sw = 5.0 * c});
    EXPECT_NEAR(link_gamma_single(net, 0, 1, 0).gamma,
                link_gamma_single(make_link({.d_sd = 2.0, .d_sw = 5.0}), 0, 1, 0).gamma, 1e-12);
  }
}

TEST(OptimalPowers, IdentityLink) {
  const auto net = make_link({});
  const auto m = link_gamma_single(net, 0, 1, 0);
  const auto p = optimal_mode_powers(m, 2e-5);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_NEAR(p[0], 4.4721e-3, 1e-7);
  const auto p4 = optimal_mode_powers(m, 8e-5);
  EXPECT_NEAR(p4[0], 2.0 * p[0], 1e-15);
}

TEST(OptimalPowers, ErrorsOnUnusableLink) {
  const auto net = make_link({.g_sd = {0.0}});
  const auto m = link_gamma_single(net, 0, 1, 0);
  EXPECT_FALSE(m.usable());
  try {
    optimal_mode_powers(m, 1e-5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnusableLink);
  }
  EXPECT_THROW(optimal_mode_powers(link_gamma_single(make_link({}), 0, 1, 0), 0.0), Error);
}

TEST(OptimalPowers, BeatRandomFeasiblePoints) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const int modes = 2 + trial % 3;
    const auto net = random_network(rng, {.nodes = 2, .modes = modes, .adversaries = 2});
    const double delta = 2e-5;
    const auto a = ref_dest_coeff(net, 0, 1);
    const auto b = ref_adv_coeff(net, 0, {0, 1});
    const auto p = optimal_mode_powers(link_gamma_multi(net, 0, 1), delta);
    double closed = 0.0;
    for (int m = 0; m < modes; ++m) closed += a[m] * p[m];

    double best = 0.0;
    for (int s = 0; s < 20000; ++s) {
      std::vector<double> u(modes);
      double norm = 0.0;
      for (auto& x : u) {
        x = std::abs(normal(rng));
        norm += x * x;
      }
      double obj = 0.0;
      for (int m = 0; m < modes; ++m) obj += a[m] * std::sqrt(delta) * u[m] / std::sqrt(norm) / b[m];
      best = std::max(best, obj);
    }
    EXPECT_GE(closed * (1 + 1e-12), best);
    EXPECT_LE((closed - best) / closed, 0.02);
  }
}

TEST(Capacity, Examples) {
  EXPECT_NEAR(link_capacity(2e-5, 1.0), 4.4721e-3, 1e-7);
  EXPECT_EQ(link_capacity(0.0, 5.0), 0.0);
  EXPECT_NEAR(link_capacity(2e-5, 16.0), 1.78885e-2, 1e-7);

  const std::vector<double> one{1.0};
  const std::vector<double> two{1.0, 1.0};
  const std::vector<double> sixteen{16.0, 16.0};
  EXPECT_NEAR(path_capacity(2e-5, one), 4.4721e-3, 1e-7);
  EXPECT_NEAR(path_capacity(2e-5, two), 3.1623e-3, 1e-7);
  EXPECT_NEAR(path_capacity(2e-5, sixteen), 1.26491e-2, 1e-7);
  const std::vector<double> dead{1.0, 0.0};
  EXPECT_THROW(path_capacity(2e-5, dead), Error);
}

TEST(Capacity, AllocationIsEqualizedAndSumsToBudget) {
  EXPECT_DOUBLE_EQ(allocate_delta(std::sqrt(1e-5), 1.0), 1e-5);
  const std::vector<double> gammas{1.0, 4.0};
  const double c = path_capacity(2e-5, gammas);
  const double d1 = allocate_delta(c, 1.0);
  const double d2 = allocate_delta(c, 4.0);
  EXPECT_NEAR(d1, 1.6e-5, 1e-18);
  EXPECT_NEAR(d2, 0.4e-5, 1e-18);
  EXPECT_NEAR(d1 + d2, 2e-5, 1e-18);
  EXPECT_NEAR(link_capacity(d1, 1.0), link_capacity(d2, 4.0), 1e-15);
}

TEST(Surrogate, Examples) {
  const auto net = make_link({});
  const std::vector<double> p{std::sqrt(2e-5)};
  EXPECT_NEAR(covert_surrogate(net, 0, p, single()), 2e-5, 1e-18);
  const std::vector<double> zero{0.0};
  EXPECT_EQ(covert_surrogate(net, 0, zero, single()), 0.0);
  const std::vector<double> p2{2.0 * std::sqrt(2e-5)};
  EXPECT_NEAR(covert_surrogate(net, 0, p2, single()), 8e-5, 1e-18);
}

TEST(Surrogate, TightAtOptimumOnRandomLinks) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = random_network(rng, {.nodes = 2, .modes = 1 + trial % 4, .adversaries = 2});
    const double delta = 1e-6 * (1 + trial);
    MetricOptions o;
    const auto p = optimal_mode_powers(link_metric(net, 0, 1, o), delta);
    EXPECT_LE(rel_diff(covert_surrogate(net, 0, p, o), delta), 1e-12);
  }
}

TEST(ExactKl, Examples) {
  EXPECT_EQ(exact_gaussian_kl(0.0), 0.0);
  const double x = 1e-2;
  const double v = exact_gaussian_kl(x);
  EXPECT_GE(v, x * x / 4 - x * x * x);
  EXPECT_LE(v, x * x / 4 + x * x * x);
  EXPECT_NEAR(exact_gaussian_kl(1.0), 0.5 * (0.5 - 1.0 + std::log(2.0)), 1e-15);
  EXPECT_NEAR(exact_gaussian_kl(1.0), 0.09657, 1e-5);
  // Series and closed form agree near the switch-over point.
  EXPECT_NEAR(exact_gaussian_kl(0.0499999), 0.5 * (std::log1p(0.0499999) - 0.0499999 / 1.0499999),
              1e-16);
}

TEST(Pinsker, Examples) {
  EXPECT_EQ(pinsker_bound(0.0), 0.5);
  EXPECT_EQ(pinsker_bound(2.0), 0.0);
  EXPECT_NEAR(pinsker_bound(0.01), 0.5 - 0.5 * std::sqrt(0.005), 1e-15);
  EXPECT_NEAR(pinsker_bound(0.01), 0.46464, 1e-5);
}

TEST(LinearizedCapacity, IsHalfTheLinkCapacity) {
  const auto net = make_link({});
  const std::vector<double> p{std::sqrt(2e-5)};
  EXPECT_NEAR(linearized_capacity(net, 0, 1, p), 2.2361e-3, 1e-7);
  const std::vector<double> zero{0.0};
  EXPECT_EQ(linearized_capacity(net, 0, 1, zero), 0.0);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rnd = random_network(rng, {.nodes = 2, .modes = 1 + trial % 4});
    const auto m = link_gamma_multi(rnd, 0, 1);
    const double delta = 3e-5;
    const auto pw = optimal_mode_powers(m, delta);
    EXPECT_LE(rel_diff(2.0 * linearized_capacity(rnd, 0, 1, pw), link_capacity(delta, m.gamma)),
              1e-12);
  }
}

TEST(ExactKlAtAdversary, BelowQuarterOfSurrogate) {
  const auto net = make_link({});
  const std::vector<double> p{std::sqrt(2e-5)};
  const double kl = exact_kl_at_adversary(net, 0, p, 0, CsiVariant::Known);
  EXPECT_NEAR(kl, exact_gaussian_kl(std::sqrt(2e-5)), 1e-18);
  EXPECT_LE(kl, 2e-5 / 4.0);
}
