#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "log_scalar.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace gapcert {

struct ExpanParams {
  LogScalar alpha = LogScalar::one();
  double eps = 0.2;
  LogScalar L = LogScalar::one();

  // alpha(d), 0.2, 24/alpha(d)
  static ExpanParams nominal(int d) { return {alpha_nominal(d), eps_nominal(), L_nominal(d)}; }

  void validate() const {
    if (!(alpha.sign() > 0 && alpha.ln() <= 0.0)) throw PreconditionError("ExpanParams: need 0 < alpha <= 1");
    if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("ExpanParams: need 0 < eps <= 1");
    if (!(L.sign() > 0 && L.ln() >= 0.0)) throw PreconditionError("ExpanParams: need L >= 1");
  }
};

enum class ExpanPart { A, B };
enum class CheckMode { Exact, Sampled, Sufficient };
enum class Verdict { Pass, Fail, NotFalsified, Inconclusive };

inline const char* to_string(ExpanPart p) { return p == ExpanPart::A ? "A" : "B"; }
inline const char* to_string(CheckMode m) {
  switch (m) {
    case CheckMode::Exact: return "exact";
    case CheckMode::Sampled: return "sampled";
    case CheckMode::Sufficient: return "sufficient-condition";
  }
  return "?";
}
inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotFalsified: return "not-falsified";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct ExpanWitness {
  VertexSet s;
  int ell = 0;
  int ball_size = 0;           // part A: |B(S, ell)|
  LogScalar threshold;         // part A: alpha (d-1)^ell |S|; part B: L (d-1-eps)^ell
  std::vector<Edge> t_set;     // part B: T
  std::vector<int> t_counts;   // part B: per vertex of S, |{e in T : dist(v,e) <= ell-1}|
};

struct ExpanVerdict {
  ExpanPart part = ExpanPart::A;
  CheckMode mode = CheckMode::Exact;
  Verdict verdict = Verdict::Pass;
  std::optional<ExpanWitness> witness;
  Vertex chosen = -1;      // part B instance: the admissible vertex
  long long checked = 0;   // (S, ell) pairs examined
  bool passed() const { return verdict == Verdict::Pass || verdict == Verdict::NotFalsified; }
};

inline constexpr int kExactSubsetMaxN = 20;

namespace detail {

inline double ln_three_quarter_n(int n) { return std::log(0.75 * n); }

// |B| >= min{3n/4, alpha (d-1)^ell |S|}, compared in logs.
inline bool partA_holds(int ball, int n, double ln_alpha, int ell, double ln_dm1, int s) {
  if (4LL * ball >= 3LL * n) return true;
  return std::log(double(ball)) >= ln_alpha + ell * ln_dm1 + std::log(double(s));
}

inline VertexSet mask_to_set(std::uint32_t mask, int n) {
  VertexSet s;
  for (int v = 0; v < n; ++v)
    if (mask >> v & 1u) s.push_back(v);
  return s;
}

inline std::vector<std::uint32_t> neighbor_masks(const RegularGraph& g) {
  std::vector<std::uint32_t> nbr(g.n(), 0);
  for (Vertex v = 0; v < g.n(); ++v)
    for (Vertex w : g.neighbors(v)) nbr[v] |= 1u << w;
  return nbr;
}

// Ball sizes |B(S, ell)| for ell = 0..n from a vertex mask.
inline void ball_sizes_mask(const std::vector<std::uint32_t>& nbr, std::uint32_t s, int n, std::vector<int>& out) {
  out.assign(n + 1, 0);
  std::uint32_t b = s, frontier = s;
  out[0] = std::popcount(s);
  for (int ell = 1; ell <= n; ++ell) {
    std::uint32_t nb = 0;
    for (std::uint32_t f = frontier; f; f &= f - 1) nb |= nbr[std::countr_zero(f)];
    frontier = nb & ~b;
    b |= nb;
    out[ell] = std::popcount(b);
  }
}

// Shade a fitted log-threshold down so that it passes the same comparisons
// that produced it, whatever the rounding of the sums involved.
inline double shade_down(double ln) { return ln - 1e-12 * std::max(1.0, std::fabs(ln)); }

}  // namespace detail

inline ExpanVerdict partA_check_exact(const RegularGraph& g, const LogScalar& alpha) {
  const int n = g.n();
  if (n > kExactSubsetMaxN) throw PreconditionError("partA_check_exact: n > 20; use partA_check_sampled");
  ExpanVerdict v{ExpanPart::A, CheckMode::Exact, Verdict::Pass, std::nullopt, -1, 0};
  auto nbr = detail::neighbor_masks(g);
  const double ln_a = alpha.ln();
  const double ln_dm1 = std::log(g.d() - 1.0);
  std::vector<int> sizes;
  const std::uint32_t total = n == 32 ? 0 : (1u << n);
  for (std::uint32_t s = 1; s < total; ++s) {
    detail::ball_sizes_mask(nbr, s, n, sizes);
    int sz = sizes[0];
    for (int ell = 1; ell <= n; ++ell) {
      ++v.checked;
      if (!detail::partA_holds(sizes[ell], n, ln_a, ell, ln_dm1, sz)) {
        v.verdict = Verdict::Fail;
        ExpanWitness w;
        w.s = detail::mask_to_set(s, n);
        w.ell = ell;
        w.ball_size = sizes[ell];
        w.threshold = LogScalar::from_log(ln_a + ell * ln_dm1 + std::log(double(sz)));
        v.witness = w;
        return v;
      }
    }
  }
  return v;
}

// Largest alpha (capped at 1) passing partA_check_exact.
inline LogScalar partA_fit_alpha(const RegularGraph& g) {
  const int n = g.n();
  if (n > kExactSubsetMaxN) throw PreconditionError("partA_fit_alpha: n > 20");
  auto nbr = detail::neighbor_masks(g);
  const double ln_dm1 = std::log(g.d() - 1.0);
  double best = 0.0;
  std::vector<int> sizes;
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    detail::ball_sizes_mask(nbr, s, n, sizes);
    for (int ell = 1; ell <= n; ++ell) {
      if (4 * sizes[ell] >= 3 * n) break;
      double cand = std::log(double(sizes[ell])) - ell * ln_dm1 - std::log(double(sizes[0]));
      best = std::min(best, cand);
    }
  }
  if (best == 0.0) return LogScalar::one();
  return LogScalar::from_log(detail::shade_down(best));
}

// Lower bound on alpha for part A from the spectrum: iterates the
// neighbourhood bound |N(S)| >= d^2 s / (lambda^2 + (d^2 - lambda^2) s/n) on
// ball sizes, plus one new vertex per step on connected graphs.
inline LogScalar partA_certified_alpha(const RegularGraph& g, double lambda) {
  const int n = g.n();
  const double d = g.d();
  const double lam = std::min(d, lambda + 1e-9 * d);
  const bool connected = is_connected(g);
  const double ln_dm1 = std::log(d - 1.0);
  auto step = [&](long long s) {
    double tanner = d * d * s / (lam * lam + (d * d - lam * lam) * s / n);
    long long t = static_cast<long long>(std::ceil(tanner - 1e-9));
    long long grow = (connected && s < n) ? s + 1 : s;
    return std::min<long long>(n, std::max({s, t, grow}));
  };
  double best = 0.0;
  for (long long s = 1; s <= n; ++s) {
    long long b = s;
    for (int ell = 1; ell <= n; ++ell) {
      long long nb = step(b);
      if (4 * nb >= 3LL * n) break;
      if (nb == b && !connected) return LogScalar::zero();
      b = nb;
      best = std::min(best, std::log(double(b)) - ell * ln_dm1 - std::log(double(s)));
    }
  }
  if (best == 0.0) return LogScalar::one();
  return LogScalar::from_log(detail::shade_down(best));
}

// Falsification search; never returns Pass.
inline ExpanVerdict partA_check_sampled(const RegularGraph& g, const LogScalar& alpha, long long trials, Rng& rng) {
  ExpanVerdict v{ExpanPart::A, CheckMode::Sampled, Verdict::NotFalsified, std::nullopt, -1, 0};
  const int n = g.n();
  const double ln_a = alpha.ln();
  const double ln_dm1 = std::log(g.d() - 1.0);
  std::vector<Vertex> perm(n);
  for (long long t = 0; t < trials; ++t) {
    VertexSet s;
    double u = rng.uniform();
    if (u < 0.25) {
      s = {static_cast<Vertex>(rng.below(n))};
    } else if (u < 0.5) {
      Vertex root = static_cast<Vertex>(rng.below(n));
      Vertex src[] = {root};
      auto dist = bfs_distances(g, src);
      int ecc = 0;
      for (int x : dist)
        if (x != kInfDist) ecc = std::max(ecc, x);
      int r = static_cast<int>(rng.below(ecc + 1));
      s = ball(g, src, r);
    } else {
      int size = 1 + static_cast<int>(rng.below(n));
      for (int i = 0; i < n; ++i) perm[i] = i;
      for (int i = 0; i < size; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
      s = make_vertex_set({perm.begin(), perm.begin() + size});
    }
    auto dist = bfs_distances(g, s);
    std::vector<int> layer(n + 1, 0);
    for (int x : dist)
      if (x != kInfDist) ++layer[x];
    int acc = layer[0];
    for (int ell = 1; ell <= n; ++ell) {
      acc += layer[ell];
      ++v.checked;
      if (!detail::partA_holds(acc, n, ln_a, ell, ln_dm1, static_cast<int>(s.size()))) {
        v.verdict = Verdict::Fail;
        ExpanWitness w;
        w.s = s;
        w.ell = ell;
        w.ball_size = acc;
        w.threshold = LogScalar::from_log(ln_a + ell * ln_dm1 + std::log(double(s.size())));
        v.witness = w;
        return v;
      }
    }
  }
  return v;
}

// L (d-1-eps)^ell
inline LogScalar partB_threshold(int d, const ExpanParams& p, int ell) {
  return p.L * ls(d - 1.0 - p.eps).pow(ell);
}

// alpha (d-1)^{ell-1} |S| <= 3n/4
inline bool partB_precondition(int n, int d, const ExpanParams& p, int ell, std::size_t s_size) {
  double lhs = p.alpha.ln() + (ell - 1) * std::log(d - 1.0) + std::log(double(s_size));
  return lhs <= detail::ln_three_quarter_n(n);
}

namespace detail {

// Edge indices within distance ell-1 of v.
inline std::vector<int> edges_near(const RegularGraph& g, Vertex v, int ell) {
  Vertex src[] = {v};
  auto dist = bfs_distances(g, src, ell - 1);
  std::vector<int> out;
  const auto& es = g.edges();
  for (int i = 0; i < static_cast<int>(es.size()); ++i)
    if (edge_dist(dist, es[i]) <= ell - 1) out.push_back(i);
  return out;
}

}  // namespace detail

inline ExpanVerdict partB_check_instance(const RegularGraph& g, std::span<const Vertex> s_in, int ell,
                                         const ExpanParams& params) {
  params.validate();
  if (s_in.empty()) throw PreconditionError("partB_check_instance: empty S");
  if (ell < 1) throw PreconditionError("partB_check_instance: need ell >= 1");
  VertexSet s = make_vertex_set({s_in.begin(), s_in.end()});
  if (!partB_precondition(g.n(), g.d(), params, ell, s.size()))
    throw PreconditionError("partB_check_instance: alpha (d-1)^(ell-1) |S| > 3n/4");
  ExpanVerdict v{ExpanPart::B, CheckMode::Exact, Verdict::Pass, std::nullopt, -1, 1};
  const LogScalar tau = partB_threshold(g.d(), params, ell);
  // Edge counts never exceed |S|, so T is empty once the threshold does.
  if (tau > ls(double(s.size()))) {
    v.chosen = s.front();
    return v;
  }
  std::vector<std::vector<int>> near(s.size());
  std::vector<int> cnt(g.edge_count(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    near[i] = detail::edges_near(g, s[i], ell);
    for (int e : near[i]) ++cnt[e];
  }
  std::vector<char> in_t(g.edge_count(), 0);
  std::vector<Edge> t_set;
  for (std::size_t e = 0; e < cnt.size(); ++e)
    if (cnt[e] > 0 && ls(cnt[e]) >= tau) {
      in_t[e] = 1;
      t_set.push_back(g.edges()[e]);
    }
  std::vector<int> seen(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (int e : near[i]) seen[i] += in_t[e];
    if (ls(seen[i]) <= tau) {
      v.chosen = s[i];
      return v;
    }
  }
  v.verdict = Verdict::Fail;
  ExpanWitness w;
  w.s = s;
  w.ell = ell;
  w.threshold = tau;
  w.t_set = std::move(t_set);
  w.t_counts = seen;
  v.witness = w;
  return v;
}

// Exhaustive over (ell, S); ell runs while some |S| >= 1 meets the
// precondition, capped at n.
inline ExpanVerdict partB_check_exact(const RegularGraph& g, const ExpanParams& params) {
  params.validate();
  const int n = g.n();
  if (n > kExactSubsetMaxN) throw PreconditionError("partB_check_exact: n > 20");
  ExpanVerdict v{ExpanPart::B, CheckMode::Exact, Verdict::Pass, std::nullopt, -1, 0};
  const auto& es = g.edges();
  const int m = static_cast<int>(es.size());
  // reach[r][x]: vertices within distance r of x
  std::vector<std::vector<std::uint32_t>> reach(n, std::vector<std::uint32_t>(n, 0));
  for (Vertex x = 0; x < n; ++x) {
    Vertex src[] = {x};
    auto dist = bfs_distances(g, src);
    for (int r = 0; r < n; ++r)
      for (Vertex y = 0; y < n; ++y)
        if (dist[y] <= r) reach[r][x] |= 1u << y;
  }
  std::vector<std::uint32_t> edge_reach(m);
  std::vector<int> t_idx;
  for (int ell = 1; ell <= n; ++ell) {
    int max_size = 0;
    for (int k = 1; k <= n; ++k)
      if (partB_precondition(n, g.d(), params, ell, k)) max_size = k;
    if (max_size == 0) break;
    const LogScalar tau = partB_threshold(g.d(), params, ell);
    // Integer forms of "count >= tau" and "count <= tau".
    int ge = n + 1, le = -1;
    for (int k = n; k >= 0; --k)
      if (ls(k) >= tau) ge = k;
    for (int k = 0; k <= m; ++k)
      if (ls(k) <= tau) le = k;
    for (int e = 0; e < m; ++e) edge_reach[e] = reach[ell - 1][es[e].u] | reach[ell - 1][es[e].v];
    for (std::uint32_t s = 1; s < (1u << n); ++s) {
      int sz = std::popcount(s);
      if (sz > max_size) continue;
      ++v.checked;
      if (ge > sz) continue;  // T is empty
      t_idx.clear();
      for (int e = 0; e < m; ++e)
        if (std::popcount(s & edge_reach[e]) >= ge) t_idx.push_back(e);
      bool found = false;
      for (std::uint32_t f = s; f && !found; f &= f - 1) {
        int x = std::countr_zero(f);
        int c = 0;
        for (int e : t_idx) c += edge_reach[e] >> x & 1u;
        if (c <= le) found = true;
      }
      if (!found) {
        VertexSet sv = detail::mask_to_set(s, n);
        auto inst = partB_check_instance(g, sv, ell, params);
        v.verdict = Verdict::Fail;
        v.witness = inst.witness;
        return v;
      }
    }
  }
  return v;
}

// Spectral sufficient condition for part B with the nominal parameters.
inline ExpanVerdict partB_spectral_sufficient(const RegularGraph& g, std::optional<double> lambda = std::nullopt) {
  if (g.d() < 6) throw PreconditionError("partB_spectral_sufficient: requires d >= 6");
  double lam = lambda ? *lambda : eigen_summary(g).lambda;
  ExpanVerdict v{ExpanPart::B, CheckMode::Sufficient, Verdict::Inconclusive, std::nullopt, -1, 0};
  if (lam <= 2.1 * std::sqrt(g.d() - 1.0)) v.verdict = Verdict::Pass;
  return v;
}

struct PopularEdgeReport {
  long long t_size = 0;
  LogScalar bound;  // |S| d / (L (d-2)) ((d-1)/(d-1-eps))^ell
  bool holds = false;
  double ln_slack = 0.0;  // ln(bound) - ln|T|
};

inline PopularEdgeReport popular_edge_bound_check(const RegularGraph& g, std::span<const Vertex> s_in, int ell,
                                         const ExpanParams& params) {
  params.validate();
  if (s_in.empty() || ell < 1) throw PreconditionError("popular_edge_bound_check: need nonempty S and ell >= 1");
  VertexSet s = make_vertex_set({s_in.begin(), s_in.end()});
  if (!partB_precondition(g.n(), g.d(), params, ell, s.size()))
    throw PreconditionError("popular_edge_bound_check: alpha (d-1)^(ell-1) |S| > 3n/4");
  const int d = g.d();
  const LogScalar tau = partB_threshold(d, params, ell);
  std::vector<int> cnt(g.edge_count(), 0);
  for (Vertex x : s)
    for (int e : detail::edges_near(g, x, ell)) ++cnt[e];
  PopularEdgeReport r;
  for (int c : cnt)
    if (c > 0 && ls(c) >= tau) ++r.t_size;
  r.bound = ls(double(s.size()) * d / (d - 2.0)) / params.L * ls((d - 1.0) / (d - 1.0 - params.eps)).pow(ell);
  r.holds = ls(double(r.t_size)) <= r.bound;
  r.ln_slack = r.t_size == 0 ? std::numeric_limits<double>::infinity() : r.bound.ln() - std::log(double(r.t_size));
  return r;
}

struct CheegerGrowthReport {
  double delta = 0.0;
  long long ell_star = 0;  // ceil(log_{1.0016}(3/(4 delta)))
  LogScalar gamma;         // (1.0016/(d-1))^{ell_star}
  double h = 0.0;
  bool hypothesis_holds = false;  // h(G) >= 0.0048 d
  bool exhaustive = false;
  long long checked = 0;
  bool conclusion_holds = true;
  std::optional<ExpanWitness> witness;
};

inline long long cheeger_growth_ell_star(double delta) {
  return static_cast<long long>(std::ceil(std::log(3.0 / (4.0 * delta)) / std::log(1.0016)));
}

inline CheegerGrowthReport cheeger_growth_check(const RegularGraph& g, double delta, long long trials = 2000,
                                         std::uint64_t seed = 1) {
  if (!(delta > 0.0 && delta < 0.75)) throw PreconditionError("cheeger_growth_check: need 0 < delta < 3/4");
  if (g.n() > kCheegerExactMaxN) throw PreconditionError("cheeger_growth_check: hypothesis needs exact h(G), n <= 24");
  const int n = g.n();
  const int d = g.d();
  CheegerGrowthReport r;
  r.delta = delta;
  r.ell_star = cheeger_growth_ell_star(delta);
  r.gamma = ls(1.0016 / (d - 1.0)).pow(static_cast<double>(r.ell_star));
  r.h = cheeger_exact(g).h.value();
  r.hypothesis_holds = r.h >= 0.0048 * d;
  const double ln_g = r.gamma.ln();
  const double ln_dm1 = std::log(d - 1.0);
  auto check = [&](const VertexSet& a, const std::vector<int>& sizes) {
    for (int ell = 1; ell <= n; ++ell) {
      ++r.checked;
      if (!detail::partA_holds(sizes[ell], n, ln_g, ell, ln_dm1, static_cast<int>(a.size()))) {
        r.conclusion_holds = false;
        ExpanWitness w;
        w.s = a;
        w.ell = ell;
        w.ball_size = sizes[ell];
        w.threshold = LogScalar::from_log(ln_g + ell * ln_dm1 + std::log(double(a.size())));
        r.witness = w;
        return false;
      }
    }
    return true;
  };
  const double min_size = delta * n;
  std::vector<int> sizes;
  if (n <= kExactSubsetMaxN) {
    r.exhaustive = true;
    auto nbr = detail::neighbor_masks(g);
    for (std::uint32_t s = 1; s < (1u << n); ++s) {
      if (std::popcount(s) < min_size) continue;
      detail::ball_sizes_mask(nbr, s, n, sizes);
      if (!check(detail::mask_to_set(s, n), sizes)) return r;
    }
    return r;
  }
  Rng rng(seed);
  std::vector<Vertex> perm(n);
  const int lo = static_cast<int>(std::ceil(min_size));
  for (long long t = 0; t < trials; ++t) {
    int size = lo + static_cast<int>(rng.below(n - lo + 1));
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = 0; i < size; ++i) std::swap(perm[i], perm[i + rng.below(n - i)]);
    VertexSet a = make_vertex_set({perm.begin(), perm.begin() + size});
    auto dist = bfs_distances(g, a);
    sizes.assign(n + 1, 0);
    for (int x : dist)
      if (x != kInfDist) ++sizes[x];
    for (int ell = 1; ell <= n; ++ell) sizes[ell] += sizes[ell - 1];
    if (!check(a, sizes)) return r;
  }
  return r;
}

}  // namespace gapcert
