#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace gapcert {

// Perfect matching on the points [n]x[d]; point p belongs to vertex p / d.
struct Pairing {
  int n = 0;
  int d = 0;
  std::vector<int> partner;

  int vertex_of(int point) const { return point / d; }
};

inline void check_pairing_params(int n, int d) {
  if (d < 3 || n < d) throw PreconditionError("configuration model: need n >= d >= 3");
  if ((static_cast<long long>(n) * d) % 2 != 0) throw PreconditionError("configuration model: n*d must be even");
}

inline Pairing sample_pairing(int n, int d, Rng& rng) {
  check_pairing_params(n, d);
  const int np = n * d;
  std::vector<int> pts(np);
  for (int i = 0; i < np; ++i) pts[i] = i;
  rng.shuffle(std::span<int>(pts));
  Pairing p{n, d, std::vector<int>(np)};
  for (int i = 0; i < np; i += 2) {
    p.partner[pts[i]] = pts[i + 1];
    p.partner[pts[i + 1]] = pts[i];
  }
  return p;
}

inline MultiGraph collapse(const Pairing& p) {
  MultiGraph m(p.n);
  for (int a = 0; a < static_cast<int>(p.partner.size()); ++a)
    if (a < p.partner[a]) m.add_edge(p.vertex_of(a), p.vertex_of(p.partner[a]));
  return m;
}

inline bool is_simple(const MultiGraph& m) {
  std::vector<Vertex> nb;
  for (Vertex v = 0; v < m.n(); ++v) {
    auto s = m.neighbors(v);
    nb.assign(s.begin(), s.end());
    std::sort(nb.begin(), nb.end());
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] == v) return false;
      if (i > 0 && nb[i] == nb[i - 1]) return false;
    }
  }
  return true;
}

// 100 * e^{(d^2-1)/4}, rounded up.
inline long long default_max_rejects(int d) {
  return static_cast<long long>(std::ceil(100.0 * std::exp((d * d - 1) / 4.0)));
}

struct SampledGraph {
  RegularGraph graph;
  long long rejections = 0;
};

// Rejection sampling from the pairing model. Pairs are drawn sequentially
// (fixed point, uniform partner) and an attempt is abandoned as soon as a loop
// or repeated edge appears; accepted outputs are exactly the simple pairings.
inline SampledGraph sample_simple_regular(int n, int d, Rng& rng, std::optional<long long> max_rejects = std::nullopt) {
  check_pairing_params(n, d);
  const long long budget = max_rejects.value_or(default_max_rejects(d));
  const int np = n * d;
  std::vector<int> pts(np);
  std::vector<std::vector<Vertex>> adj(n);
  for (long long attempt = 0;; ++attempt) {
    if (attempt > budget)
      throw ResourceError("sample_simple_regular: exceeded max_rejects = " + std::to_string(budget));
    for (int i = 0; i < np; ++i) pts[i] = i;
    for (auto& a : adj) a.clear();
    int remaining = np;
    bool ok = true;
    while (remaining > 0) {
      int p = pts[--remaining];
      int k = static_cast<int>(rng.below(remaining));
      int q = pts[k];
      pts[k] = pts[--remaining];
      Vertex a = p / d, b = q / d;
      if (a == b || std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) {
        ok = false;
        break;
      }
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    if (ok) return {RegularGraph(n, d, adj), attempt};
  }
}

// Uniform simple d-regular graph that stays cheap when d is close to n: for
// n - 1 - d < d it samples the complement degree instead, which is the same
// distribution since complementation is a bijection.
inline SampledGraph sample_simple_regular_any(int n, int d, Rng& rng) {
  const int dc = n - 1 - d;
  if (dc >= d || dc < 3) return sample_simple_regular(n, d, rng);
  auto s = sample_simple_regular(n, dc, rng);
  return {complement(s.graph), s.rejections};
}

struct ExplorationLevel {
  int ell = 0;
  int ball = 0;      // |B(S, ell)|
  int boundary = 0;  // |dB(S, ell)|
  int delta = 0;     // vertices of dB(S, ell) with exactly one edge into B(S, ell-1)
};

struct ExplorationTrace {
  VertexSet seed;
  std::vector<ExplorationLevel> levels;  // ell = 0..ell_max
};

template <AdjacencyGraph G>
ExplorationTrace explore(const G& g, std::span<const Vertex> s, int ell_max) {
  if (s.empty()) throw PreconditionError("explore: empty seed set");
  ExplorationTrace tr;
  tr.seed = make_vertex_set({s.begin(), s.end()});
  auto dist = bfs_distances(g, s, ell_max);
  std::vector<int> ball_count(ell_max + 1, 0), delta(ell_max + 1, 0), layer(ell_max + 1, 0);
  for (Vertex v = 0; v < g.n(); ++v) {
    int dv = dist[v];
    if (dv > ell_max) continue;
    ++layer[dv];
    if (dv == 0) continue;
    int into = 0;
    for (Vertex w : g.neighbors(v))
      if (dist[w] == dv - 1) ++into;
    if (into == 1) ++delta[dv];
  }
  int acc = 0;
  for (int ell = 0; ell <= ell_max; ++ell) {
    acc += layer[ell];
    tr.levels.push_back({ell, acc, layer[ell], delta[ell]});
  }
  return tr;
}

// max(0, 1 - ((2e/(1-theta)) * |A|/(n-2|R|))^{((1-theta)/2)|A|})
inline double exploration_bound(double theta, int a_size, int n, int r_size) {
  if (!(theta > 0 && theta < 1)) throw PreconditionError("exploration_bound: theta must lie in (0,1)");
  if (a_size < 0 || r_size < 0 || 2 * r_size >= n) throw PreconditionError("exploration_bound: need |R| < n/2");
  double base = (2.0 * std::numbers::e / (1.0 - theta)) * a_size / (n - 2.0 * r_size);
  if (base >= 1.0) return 0.0;
  double expo = (1.0 - theta) / 2.0 * a_size;
  return std::max(0.0, 1.0 - std::pow(base, expo));
}

struct MonteCarloEstimate {
  int trials = 0;
  int successes = 0;
  double frequency = 0.0;
  double std_error = 0.0;
};

// Estimates P[|Delta(R,1)| >= theta |A|] where the matching is the given prefix
// (pairs of points, all on vertices of R) completed uniformly at random. Only the
// partners of R's free points matter, so only those are drawn.
inline MonteCarloEstimate exploration_montecarlo(int n, int d, std::span<const Vertex> r_set,
                                             std::span<const std::pair<int, int>> prefix, double theta, int trials,
                                             Rng& rng) {
  check_pairing_params(n, d);
  if (!(theta > 0 && theta < 1)) throw PreconditionError("exploration_montecarlo: theta must lie in (0,1)");
  VertexSet r = make_vertex_set({r_set.begin(), r_set.end()});
  if (2 * static_cast<int>(r.size()) >= n) throw PreconditionError("exploration_montecarlo: need |R| < n/2");
  std::vector<char> in_r(n, 0);
  for (Vertex v : r) {
    if (v < 0 || v >= n) throw std::out_of_range("exploration_montecarlo: vertex out of range");
    in_r[v] = 1;
  }
  const int np = n * d;
  std::vector<char> used(np, 0);
  for (auto [a, b] : prefix) {
    if (a < 0 || b < 0 || a >= np || b >= np || a == b) throw PreconditionError("exploration_montecarlo: bad prefix pair");
    if (!in_r[a / d] || !in_r[b / d]) throw PreconditionError("exploration_montecarlo: prefix must lie on R");
    if (used[a] || used[b]) throw PreconditionError("exploration_montecarlo: prefix is not a matching");
    used[a] = used[b] = 1;
  }
  std::vector<int> free_r;  // A = (R x [d]) minus the prefix points
  for (Vertex v : r)
    for (int i = 0; i < d; ++i)
      if (!used[v * d + i]) free_r.push_back(v * d + i);
  const int a_size = static_cast<int>(free_r.size());
  const double need = theta * a_size;

  std::vector<int> pool, pos(np), cnt(n, 0), touched;
  MonteCarloEstimate est;
  est.trials = trials;
  for (int t = 0; t < trials; ++t) {
    pool.clear();
    for (int p = 0; p < np; ++p)
      if (!used[p]) {
        pos[p] = static_cast<int>(pool.size());
        pool.push_back(p);
      }
    auto take = [&](int p) {
      int i = pos[p];
      int last = pool.back();
      pool[i] = last;
      pos[last] = i;
      pool.pop_back();
      pos[p] = -1;
    };
    touched.clear();
    for (int p : free_r) {
      if (pos[p] < 0) continue;
      take(p);
      int q = pool[rng.below(pool.size())];
      take(q);
      Vertex w = q / d;
      if (!in_r[w]) {
        if (cnt[w]++ == 0) touched.push_back(w);
      }
    }
    int delta = 0;
    for (Vertex w : touched) {
      if (cnt[w] == 1) ++delta;
      cnt[w] = 0;
    }
    if (delta >= need) ++est.successes;
  }
  if (trials > 0) {
    est.frequency = static_cast<double>(est.successes) / trials;
    est.std_error = std::sqrt(est.frequency * (1.0 - est.frequency) / trials);
  }
  return est;
}

}  // namespace gapcert
