#include <gtest/gtest.h>

#include <algorithm>

#include "errors.hpp"
#include "graph.hpp"
#include "random_graphs.hpp"
#include "rng.hpp"

using namespace gapcert;

namespace {

// All-pairs distances by Floyd-Warshall, independent of the BFS code.
std::vector<std::vector<int>> floyd(const RegularGraph& g) {
  const int n = g.n(), inf = 1 << 20;
  std::vector<std::vector<int>> D(n, std::vector<int>(n, inf));
  for (int v = 0; v < n; ++v) {
    D[v][v] = 0;
    for (Vertex w : g.neighbors(v)) D[v][w] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) D[i][j] = std::min(D[i][j], D[i][k] + D[k][j]);
  for (auto& row : D)
    for (int& x : row)
      if (x >= inf) x = kInfDist;
  return D;
}

RegularGraph random_cubic(int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_simple_regular(n, 3, rng).graph;
}

}  // namespace

TEST(GraphCore, StandardFamilies) {
  auto k4 = complete_graph(4);
  EXPECT_EQ(k4.d(), 3);
  EXPECT_EQ(k4.edge_count(), 6u);
  auto k33 = complete_bipartite(3);
  EXPECT_EQ(k33.n(), 6);
  EXPECT_FALSE(k33.adjacent(0, 1));
  EXPECT_EQ(k33.edge_count(), 9u);
  auto p = petersen_graph();
  EXPECT_EQ(p.n(), 10);
  EXPECT_EQ(p.edge_count(), 15u);
  auto D = floyd(p);
  int diam = 0;
  for (auto& row : D) diam = std::max(diam, *std::max_element(row.begin(), row.end()));
  EXPECT_EQ(diam, 2);
}

TEST(GraphCore, RejectsNonSimpleInput) {
  EXPECT_THROW(RegularGraph(4, 3, {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(RegularGraph(4, 3, {{0, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}), std::invalid_argument);
  EXPECT_THROW(RegularGraph(4, 3, {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}}), std::invalid_argument);
}

TEST(GraphCore, EdgeIndexIsSortedPosition) {
  auto g = random_cubic(20, 1);
  const auto& es = g.edges();
  EXPECT_TRUE(std::is_sorted(es.begin(), es.end()));
  for (std::size_t i = 0; i < es.size(); ++i) {
    EXPECT_EQ(g.edge_index(es[i]), static_cast<int>(i));
    EXPECT_TRUE(g.adjacent(es[i].u, es[i].v));
  }
  EXPECT_EQ(g.edge_index(Edge{0, 0}), -1);
}

TEST(GraphCore, DistancesMatchFloydWarshall) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto g = random_cubic(24, seed);
    auto D = floyd(g);
    for (Vertex v = 0; v < g.n(); ++v) {
      Vertex src[] = {v};
      auto bd = bfs_distances(g, src);
      for (Vertex w = 0; w < g.n(); ++w) {
        EXPECT_EQ(bd[w], D[v][w]);
        EXPECT_EQ(dist(g, v, w), D[v][w]);
      }
    }
    // set distance and edge distance
    std::vector<Vertex> S = {0, 5, 11};
    for (Vertex v = 0; v < g.n(); ++v) {
      int want = std::min({D[v][0], D[v][5], D[v][11]});
      EXPECT_EQ(dist_set(g, v, S), want);
      for (const Edge& e : g.edges()) EXPECT_EQ(dist_edge(g, v, e), std::min(D[v][e.u], D[v][e.v]));
    }
  }
}

TEST(GraphCore, DepthLimitedBfs) {
  auto g = random_cubic(30, 9);
  auto D = floyd(g);
  Vertex src[] = {3};
  auto bd = bfs_distances(g, src, 2);
  for (Vertex w = 0; w < g.n(); ++w) EXPECT_EQ(bd[w], D[3][w] <= 2 ? D[3][w] : kInfDist);
}

TEST(GraphCore, BallsAndBoundaries) {
  auto g = random_cubic(26, 4);
  auto D = floyd(g);
  std::vector<Vertex> S = {2, 7};
  for (int ell = 0; ell <= 6; ++ell) {
    VertexSet b, db;
    for (Vertex v = 0; v < g.n(); ++v) {
      int dv = std::min(D[v][2], D[v][7]);
      if (dv <= ell) b.push_back(v);
      if (dv == ell) db.push_back(v);
    }
    EXPECT_EQ(ball(g, S, ell), b) << ell;
    EXPECT_EQ(boundary(g, S, ell), db) << ell;
  }
}

TEST(GraphCore, Connectivity) {
  EXPECT_TRUE(is_connected(petersen_graph()));
  auto u = disjoint_union(complete_graph(4), complete_graph(4));
  EXPECT_EQ(u.n(), 8);
  EXPECT_FALSE(is_connected(u));
  Vertex src[] = {0};
  EXPECT_EQ(bfs_distances(u, src)[5], kInfDist);
}

TEST(GraphCore, RelabelAndComplement) {
  auto g = petersen_graph();
  std::vector<Vertex> perm = {3, 1, 4, 0, 9, 2, 6, 5, 8, 7};
  auto h = relabel(g, perm);
  for (const Edge& e : g.edges()) EXPECT_TRUE(h.adjacent(perm[e.u], perm[e.v]));
  auto c = complement(g);
  EXPECT_EQ(c.d(), 6);
  for (Vertex a = 0; a < 10; ++a)
    for (Vertex b = 0; b < 10; ++b) {
      if (a != b) {
        EXPECT_NE(g.adjacent(a, b), c.adjacent(a, b));
      }
    }
}

TEST(GraphCore, EdgeListRoundTrip) {
  auto g = random_cubic(16, 2);
  for (IndexBase base : {IndexBase::Zero, IndexBase::One}) {
    auto h = load_edge_list(save_edge_list(g, base), base);
    EXPECT_EQ(h.edges(), g.edges());
  }
}

TEST(GraphCore, EdgeListWithoutHeaderAndComments) {
  std::string text = "# K4\n0 1\n0 2\n0,3\n\n1 2  # inline\n1 3\n2 3\n";
  auto g = load_edge_list(text);
  EXPECT_EQ(g.n(), 4);
  EXPECT_EQ(g.d(), 3);
}

TEST(GraphCore, EdgeListHeaderNeedsMatchingCount) {
  // "4 3" followed by 6 lines is a header; without it "4 3" would be an edge.
  auto g = load_edge_list("4 3\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
  EXPECT_EQ(g.n(), 4);
  EXPECT_THROW(load_edge_list("4 3\n0 1\n0 2\n0 3\n1 2\n1 3\n"), ParseError);
}

TEST(GraphCore, EdgeListErrors) {
  EXPECT_THROW(load_edge_list(""), ParseError);
  EXPECT_THROW(load_edge_list("0 1 2\n"), ParseError);
  EXPECT_THROW(load_edge_list("0 x\n"), ParseError);
  EXPECT_THROW(load_edge_list("0 0\n"), ParseError);
  EXPECT_THROW(load_edge_list("0 1\n1 0\n"), ParseError);
  EXPECT_THROW(load_edge_list("1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n"), ParseError);  // 1-based read as 0-based
  EXPECT_NO_THROW(load_edge_list("1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n", IndexBase::One));
}
