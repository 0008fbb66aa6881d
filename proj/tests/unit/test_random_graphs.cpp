#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "errors.hpp"
#include "graph.hpp"
#include "random_graphs.hpp"
#include "rng.hpp"

using namespace gapcert;

TEST(RandomGraphs, PairingIsFixedPointFreeInvolution) {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    auto p = sample_pairing(10, 3, rng);
    ASSERT_EQ(p.partner.size(), 30u);
    for (int a = 0; a < 30; ++a) {
      EXPECT_NE(p.partner[a], a);
      EXPECT_EQ(p.partner[p.partner[a]], a);
    }
    auto m = collapse(p);
    EXPECT_EQ(m.edge_count(), 15u);
    for (Vertex v = 0; v < 10; ++v) EXPECT_EQ(m.degree(v), 3);
  }
}

TEST(RandomGraphs, IsSimpleDetectsLoopsAndMultiEdges) {
  MultiGraph a(3);
  a.add_edge(0, 1);
  a.add_edge(1, 2);
  EXPECT_TRUE(is_simple(a));
  a.add_edge(1, 0);
  EXPECT_FALSE(is_simple(a));
  MultiGraph b(2);
  b.add_edge(1, 1);
  EXPECT_FALSE(is_simple(b));
}

TEST(RandomGraphs, ParameterChecks) {
  Rng rng(1);
  EXPECT_THROW(sample_pairing(5, 3, rng), PreconditionError);
  EXPECT_THROW(sample_pairing(4, 2, rng), PreconditionError);
  EXPECT_THROW(sample_simple_regular(2, 3, rng), PreconditionError);
  EXPECT_THROW(sample_simple_regular(10, 9, rng, -1), ResourceError);
}

TEST(RandomGraphs, SimpleSamplesAreRegular) {
  Rng rng(5);
  for (int d : {3, 4, 6}) {
    auto s = sample_simple_regular(30, d, rng);
    EXPECT_EQ(s.graph.d(), d);
    EXPECT_GE(s.rejections, 0);
    for (Vertex v = 0; v < 30; ++v) EXPECT_EQ(static_cast<int>(s.graph.neighbors(v).size()), d);
  }
}

TEST(RandomGraphs, DeterministicPerSeed) {
  Rng a(77), b(77);
  EXPECT_EQ(sample_simple_regular(40, 3, a).graph.edges(), sample_simple_regular(40, 3, b).graph.edges());
}

// There are exactly 70 labelled cubic graphs on 6 vertices; the sampler must
// hit all of them with roughly equal frequency.
TEST(RandomGraphs, UniformOverLabelledCubicGraphsOnSixVertices) {
  Rng rng(2024);
  std::map<std::vector<Edge>, int> counts;
  const int draws = 14000;
  for (int t = 0; t < draws; ++t) ++counts[sample_simple_regular(6, 3, rng).graph.edges()];
  ASSERT_EQ(counts.size(), 70u);
  double expected = draws / 70.0, chi2 = 0.0;
  for (auto& [k, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 69 degrees of freedom; the 0.9999 quantile is about 120.
  EXPECT_LT(chi2, 120.0);
}

TEST(RandomGraphs, ComplementSamplerForDenseCase) {
  Rng rng(3);
  for (auto [n, d] : {std::pair{14, 8}, {12, 8}, {16, 10}, {20, 6}}) {
    auto s = sample_simple_regular_any(n, d, rng);
    EXPECT_EQ(s.graph.n(), n);
    EXPECT_EQ(s.graph.d(), d);
  }
  // 4-regular graphs on 8 vertices are complements of the 19355 labelled cubic
  // ones; 6000 uniform draws give about 5160 distinct graphs
  std::set<std::vector<Edge>> seen;
  for (int t = 0; t < 6000; ++t) seen.insert(sample_simple_regular_any(8, 4, rng).graph.edges());
  EXPECT_GT(seen.size(), 4900u);
  EXPECT_LE(seen.size(), 19355u);
}

TEST(RandomGraphs, ExplorationMatchesBruteForce) {
  Rng rng(8);
  auto g = sample_simple_regular(40, 3, rng).graph;
  std::vector<Vertex> S = {0, 17};
  auto tr = explore(g, S, 6);
  ASSERT_EQ(tr.levels.size(), 7u);
  for (const auto& lv : tr.levels) {
    auto b = ball(g, S, lv.ell);
    auto db = boundary(g, S, lv.ell);
    EXPECT_EQ(lv.ball, static_cast<int>(b.size()));
    EXPECT_EQ(lv.boundary, static_cast<int>(db.size()));
    int delta = 0;
    if (lv.ell > 0) {
      auto inner = ball(g, S, lv.ell - 1);
      for (Vertex v : db) {
        int into = 0;
        for (Vertex w : g.neighbors(v)) into += std::binary_search(inner.begin(), inner.end(), w);
        delta += into == 1;
      }
    }
    EXPECT_EQ(lv.delta, delta) << lv.ell;
  }
  EXPECT_THROW(explore(g, std::span<const Vertex>{}, 3), PreconditionError);
}

TEST(RandomGraphs, ExplorationBoundFormula) {
  double theta = 0.5;
  int a = 6, n = 1000, r = 2;
  double base = (2 * std::numbers::e / 0.5) * a / (n - 4.0);
  EXPECT_NEAR(exploration_bound(theta, a, n, r), 1.0 - std::pow(base, 0.25 * a), 1e-15);
  EXPECT_EQ(exploration_bound(0.5, 100, 120, 10), 0.0);
  EXPECT_THROW(exploration_bound(1.0, 6, 100, 2), PreconditionError);
  EXPECT_THROW(exploration_bound(0.5, 6, 100, 50), PreconditionError);
}

// Oracle: complete the matching by shuffling every free point, then count the
// outside vertices with exactly one edge into R.
TEST(RandomGraphs, ExplorationMonteCarloAgainstFullCompletion) {
  const int n = 30, d = 3;
  std::vector<Vertex> R = {0, 1, 2};
  std::vector<std::pair<int, int>> prefix = {{0, 3}};  // edge 0-1
  const double theta = 0.8;
  const int trials = 20000;
  Rng rng(99);
  auto est = exploration_montecarlo(n, d, R, prefix, theta, trials, rng);

  Rng orng(100);
  int succ = 0;
  std::vector<int> free;
  for (int p = 0; p < n * d; ++p)
    if (p != 0 && p != 3) free.push_back(p);
  const int a_size = 3 * d - 2;
  for (int t = 0; t < trials; ++t) {
    orng.shuffle(std::span<int>(free));
    std::vector<int> partner(n * d, -1);
    for (std::size_t i = 0; i + 1 < free.size(); i += 2) {
      partner[free[i]] = free[i + 1];
      partner[free[i + 1]] = free[i];
    }
    std::vector<int> into(n, 0);
    for (Vertex v : R)
      for (int i = 0; i < d; ++i) {
        int p = v * d + i;
        if (p == 0 || p == 3) continue;
        Vertex w = partner[p] / d;
        if (w > 2) ++into[w];
      }
    int delta = 0;
    for (int w = 3; w < n; ++w) delta += into[w] == 1;
    succ += delta >= theta * a_size;
  }
  double f = double(succ) / trials;
  double se = std::sqrt(f * (1 - f) / trials) + est.std_error;
  EXPECT_NEAR(est.frequency, f, 5 * se + 1e-3);
  EXPECT_GE(est.frequency + 5 * est.std_error, exploration_bound(theta, a_size, n, 3));
}

TEST(RandomGraphs, ExplorationMonteCarloRejectsBadPrefix) {
  Rng rng(1);
  std::vector<Vertex> R = {0, 1};
  std::vector<std::pair<int, int>> off_r = {{0, 9}};
  std::vector<std::pair<int, int>> reuse = {{0, 3}, {0, 4}};
  EXPECT_THROW(exploration_montecarlo(20, 3, R, off_r, 0.5, 10, rng), PreconditionError);
  EXPECT_THROW(exploration_montecarlo(20, 3, R, reuse, 0.5, 10, rng), PreconditionError);
}
