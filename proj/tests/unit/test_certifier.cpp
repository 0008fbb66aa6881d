#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "certifier.hpp"
#include "random_graphs.hpp"
#include "rng.hpp"

using namespace gapcert;

namespace {

RegularGraph random_graph(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  return sample_simple_regular(n, d, rng).graph;
}

// Each coordinate: a third +1, a third -1, the rest 0, shuffled.
VectorField balanced_field(int n, int k, Rng& rng) {
  VectorField f(n, k);
  std::vector<int> perm(n);
  for (int j = 0; j < k; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    for (int i = 0; i < n; ++i) f(perm[i], j) = i < n / 3 ? 1.0 : (i < 2 * n / 3 ? -1.0 : 0.0);
  }
  return f;
}

bool brute_median(const VectorField& f) {
  for (int j = 0; j < f.k(); ++j) {
    int pos = 0, neg = 0;
    for (int v = 0; v < f.n(); ++v) {
      pos += f(v, j) > 0;
      neg += f(v, j) < 0;
    }
    if (2 * pos > f.n() || 2 * neg > f.n()) return false;
  }
  return true;
}

}  // namespace

TEST(Certifier, MedianTranslateEnforcesTheMedianCondition) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    int n = 5 + static_cast<int>(rng.below(20));
    VectorField f(n, 3);
    for (int v = 0; v < n; ++v)
      for (int j = 0; j < 3; ++j) f(v, j) = std::round(4 * rng.normal());
    EXPECT_EQ(median_condition(f), brute_median(f));
    auto g = median_translate(f);
    EXPECT_TRUE(median_condition(g));
    EXPECT_TRUE(brute_median(g));
    for (int v = 1; v < n; ++v)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(v, j) - g(0, j), f(v, j) - f(0, j), 1e-12);
  }
}

TEST(Certifier, BinaryFieldValidation) {
  VectorField f(4, 1);
  EXPECT_THROW(BinaryField{f}, PreconditionError);
  f(0, 0) = 0.5;
  EXPECT_THROW(BinaryField{f}, PreconditionError);
  f(0, 0) = 1.0;
  BinaryField b(f);
  EXPECT_EQ(b(0, 0), 1);
  EXPECT_TRUE(b.median_ok());
  f(1, 0) = f(2, 0) = 1.0;
  EXPECT_FALSE(BinaryField(f).median_ok());
}

TEST(Certifier, EncodingSandwich) {
  Rng rng(2);
  auto g = random_graph(14, 3, 2);
  auto nm = UncondNorm::lq(3.0);
  for (int t = 0; t < 20; ++t) {
    VectorField f(14, 2);
    for (int v = 0; v < 14; ++v)
      for (int j = 0; j < 2; ++j) f(v, j) = std::round(8 * rng.normal()) / 4.0;
    if (f.is_constant()) continue;
    auto e = binary_encode(g, f, nm);
    EXPECT_TRUE(e.node_ok);
    EXPECT_TRUE(e.edge_ok);
    EXPECT_GE(e.delta * e.m, 0.0);
    for (double x : e.encoded.values()) EXPECT_TRUE(x == -1.0 || x == 0.0 || x == 1.0);
    double top = 0;
    for (double x : f.values()) top = std::max(top, std::fabs(x));
    EXPECT_GE(e.delta * e.m, top);
    EXPECT_EQ(e.encoded.k(), 2 * e.m);
  }
}

TEST(Certifier, AssertionLogCountsAndKeepsFirstFailure) {
  AssertionLog log;
  log.check("a", true);
  log.check("a", false, [] { return std::string("first"); });
  log.check("a", false, [] { return std::string("second"); });
  log.check("b", true);
  ASSERT_NE(log.find("a"), nullptr);
  EXPECT_EQ(log.find("a")->checked, 3);
  EXPECT_EQ(log.find("a")->failed, 2);
  EXPECT_EQ(log.find("a")->first_failure, "first");
  EXPECT_FALSE(log.all_passed());
  EXPECT_EQ(log.find("c"), nullptr);
  EXPECT_EQ(log.tallies().front().name, "a");
}

TEST(Certifier, JumpEdgesMatchDefinition) {
  Rng rng(3);
  auto g = random_graph(30, 3, 3);
  BinaryField bf(balanced_field(30, 2, rng));
  std::vector<Vertex> S = {4, 9};
  for (int ell = 1; ell <= 5; ++ell) {
    std::vector<Edge> want;
    for (const Edge& e : g.edges())
      if (std::min(dist_edge(g, 4, e), dist_edge(g, 9, e)) <= ell - 1 && bf(e.u, 1) != bf(e.v, 1)) want.push_back(e);
    EXPECT_EQ(jump_edges(g, bf, 1, S, ell), want);
  }
}

TEST(Certifier, JumpWitnessIsTheLeastScale) {
  Rng rng(4);
  auto g = random_graph(40, 4, 4);
  BinaryField bf(balanced_field(40, 3, rng));
  const LogScalar alpha = ls(0.05);
  int found = 0;
  for (Vertex v = 0; v < 40; ++v)
    for (int j = 0; j < 3; ++j) {
      if (bf(v, j) == 0) continue;
      std::vector<Vertex> S = {v};
      auto w = jump_witness(g, bf, j, S, alpha);
      int want = 0;
      for (int ell = 1; ell <= w.ell_cap && !want; ++ell) {
        double cnt = static_cast<double>(jump_edges(g, bf, j, S, ell).size());
        if (cnt >= 0.05 * a_seq(ell) / 6.0 * std::pow(3.0, ell - 1)) want = ell;
      }
      EXPECT_EQ(w.found, want > 0);
      if (w.found) {
        EXPECT_EQ(w.ell0, want);
        EXPECT_EQ(w.count, static_cast<long long>(jump_edges(g, bf, j, S, want).size()));
        ++found;
      }
    }
  EXPECT_GT(found, 0);
  std::vector<Vertex> bad = {0};
  int j0 = 0;
  while (bf(0, j0) != 0 && j0 < 2) ++j0;
  if (bf(0, j0) == 0) {
    EXPECT_THROW(jump_witness(g, bf, j0, bad, alpha), PreconditionError);
  }
}

TEST(Certifier, GreedyCrossoverIsTheLeastStableScale) {
  for (int d : {3, 6, 10})
    for (double L : {1.0, 50.0, 1e6}) {
      ExpanParams p{ls(0.1), 0.2, ls(L)};
      long long l0 = greedy_crossover(d, p);
      ASSERT_LT(l0, 100000);
      auto ok = [&](long long ell) {
        return std::log(L) + ell * std::log(d - 1.0 - 0.2) <
               std::log(0.1 * a_seq(ell) / 12.0) + (ell - 1) * std::log(d - 1.0);
      };
      for (long long ell = l0; ell < l0 + 2000; ++ell) EXPECT_TRUE(ok(ell)) << d << " " << L << " " << ell;
      if (l0 > 1) {
        EXPECT_FALSE(ok(l0 - 1));
      }
    }
  // nominal L is astronomically large, so the crossover sits far out
  EXPECT_GT(greedy_crossover(6, ExpanParams::nominal(6)), 1'000'000'000'000LL);
}

TEST(Certifier, ScaleIndexMatchesDefinition) {
  Rng rng(5);
  auto g = random_graph(36, 4, 5);
  BinaryField bf(balanced_field(36, 3, rng));
  ExpanParams p{ls(0.1), 0.2, ls(1.0)};
  AssertionLog log;
  auto L = scale_index(g, bf, 2.0, 1.0, p, log);
  for (Vertex v = 0; v < 36; ++v)
    for (int j = 0; j < 3; ++j) {
      if (bf(v, j) == 0) {
        EXPECT_EQ(L.ell_at(v, j), 0);
        continue;
      }
      std::vector<Vertex> S = {v};
      int want = 0;
      for (int ell = 1; ell <= 36 && !want; ++ell) {
        double cnt = static_cast<double>(jump_edges(g, bf, j, S, ell).size());
        if (cnt > 0 && cnt >= 0.1 * a_seq(ell) / 6.0 * std::pow(3.0, ell - 1)) want = ell;
      }
      EXPECT_EQ(L.ell_at(v, j), want);
    }
  EXPECT_TRUE(log.find("scale_index_defined")->passed());
}

TEST(Certifier, CertifyBinaryBothModes) {
  Rng rng(6);
  auto g = random_graph(60, 6, 6);
  auto f = balanced_field(60, 4, rng);
  auto nm = UncondNorm::lq(2.0);
  double sn = 0, se = 0;
  for (int v = 0; v < 60; ++v) sn += nm(f.row(v));
  for (const Edge& e : g.edges()) {
    std::vector<double> d(4);
    for (int j = 0; j < 4; ++j) d[j] = f(e.u, j) - f(e.v, j);
    se += nm(d);
  }
  for (ParamMode mode : {ParamMode::Nominal, ParamMode::Fitted}) {
    auto rep = certify(g, f, nm, 2.0, 1.0, choose_params(g, mode));
    for (const auto& t : rep.log.tallies()) EXPECT_TRUE(t.passed()) << t.name << ": " << t.first_failure;
    EXPECT_FALSE(rep.real_input);
    EXPECT_NEAR(rep.ratio, sn / se, 1e-12 * sn / se);
    EXPECT_TRUE(rep.ratio_le_pi);
    EXPECT_TRUE(rep.ratio_le_recombination);
    EXPECT_LE(rep.four_over_cprime.ln(), rep.pi.ln() + 1e-9);
    EXPECT_FALSE(rep.scales.empty());
  }
}

TEST(Certifier, ForcedSelectionExercisesMultiplicityBound) {
  Rng rng(7);
  auto g = random_graph(60, 6, 7);
  auto f = balanced_field(60, 3, rng);
  CertOptions opt;
  opt.greedy.force_selection = true;
  auto rep = certify(g, f, UncondNorm::lq(2.0), 2.0, 1.0, choose_params(g, ParamMode::Nominal), 1.0, opt);
  EXPECT_TRUE(rep.all_passed());
  const Tally* p2 = rep.log.find("greedy_P2");
  ASSERT_NE(p2, nullptr);
  EXPECT_GT(p2->checked, 0);
  EXPECT_EQ(p2->failed, 0);
}

TEST(Certifier, RealFieldGoesThroughEncoding) {
  Rng rng(8);
  auto g = random_graph(12, 3, 8);
  VectorField f(12, 2);
  for (int v = 0; v < 12; ++v)
    for (int j = 0; j < 2; ++j) f(v, j) = static_cast<double>(rng.below(5)) * 0.5;
  if (f.is_constant()) f(0, 0) += 1.0;
  auto rep = certify(g, f, UncondNorm::lq(2.0), 2.0, 1.0, choose_params(g, ParamMode::Fitted), 2.0);
  EXPECT_TRUE(rep.real_input);
  ASSERT_TRUE(rep.encoding);
  EXPECT_TRUE(rep.encoding->node_ok);
  EXPECT_TRUE(rep.encoding->edge_ok);
  for (const auto& t : rep.log.tallies()) EXPECT_TRUE(t.passed()) << t.name << ": " << t.first_failure;
  EXPECT_TRUE(rep.real_ratio_ok);
  EXPECT_TRUE(rep.p_holds);
}

TEST(Certifier, FittedParametersOnSmallGraphs) {
  auto g = random_graph(12, 3, 9);
  auto pc = choose_params(g, ParamMode::Fitted);
  EXPECT_EQ(pc.part_a, PartAStatus::Exact);
  EXPECT_EQ(pc.part_b, PartBStatus::Exact);
  EXPECT_NEAR(pc.params.alpha.ln(), partA_fit_alpha(g).ln(), 1e-12);
  if (pc.params.L.ln() > 1e-6) {
    ExpanParams lower = pc.params;
    lower.L = pc.params.L * ls(0.999);
    if (lower.L.ln() >= 0.0) {
      EXPECT_EQ(partB_check_exact(g, lower).verdict, Verdict::Fail);
    }
  }
  EXPECT_STREQ(to_string(ParamMode::Fitted), "fitted");
}

TEST(Certifier, DisconnectedGraphCannotBeFitted) {
  auto g = disjoint_union(random_graph(30, 3, 1), random_graph(30, 3, 2));
  EXPECT_THROW(choose_params(g, ParamMode::Fitted), PreconditionError);
}
