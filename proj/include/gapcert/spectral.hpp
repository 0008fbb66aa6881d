#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eigen.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace gapcert {

inline constexpr int kDenseSpectrumMaxN = 4096;

struct SpectralSummary {
  std::vector<double> eigenvalues;  // ascending; empty when computed iteratively
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  double lambda = 0.0;  // max(|lambda_2|, |lambda_n|)
  double residual = 0.0;
  bool dense = true;
};

// lambda_2 and lambda_n only, via Lanczos on the complement of the ones vector.
inline SpectralSummary extremal_summary(const RegularGraph& g, double tol = 1e-9) {
  auto lz = lanczos_extremal(g, tol);
  SpectralSummary s;
  s.dense = false;
  s.lambda1 = g.d();
  s.lambda2 = lz.top;
  s.lambda_min = lz.bottom;
  s.lambda = std::max(std::fabs(s.lambda2), std::fabs(s.lambda_min));
  s.residual = std::max(lz.top_residual, lz.bottom_residual);
  return s;
}

// Dense solve up to kDenseSpectrumMaxN vertices, Lanczos beyond.
inline SpectralSummary eigen_summary(const RegularGraph& g, double tol = 1e-9) {
  if (g.n() > kDenseSpectrumMaxN) return extremal_summary(g, tol);
  auto eig = symmetric_eigen(adjacency_matrix(g), false);
  SpectralSummary s;
  s.eigenvalues = std::move(eig.values);
  const int n = g.n();
  s.lambda1 = s.eigenvalues[n - 1];
  s.lambda2 = s.eigenvalues[n - 2];
  s.lambda_min = s.eigenvalues[0];
  s.lambda = std::max(std::fabs(s.lambda2), std::fabs(s.lambda_min));
  return s;
}

// Groups an ascending spectrum into (value, multiplicity), merging within tol.
inline std::vector<std::pair<double, int>> multiplicities(std::span<const double> eigs, double tol = 1e-8) {
  std::vector<std::pair<double, int>> out;
  for (double x : eigs) {
    if (!out.empty() && std::fabs(x - out.back().first) <= tol)
      ++out.back().second;
    else
      out.push_back({x, 1});
  }
  return out;
}

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline Rational make_rational(long long num, long long den) {
  long long g = std::gcd(num, den);
  if (g == 0) g = 1;
  return {num / g, den / g};
}

struct CheegerResult {
  Rational h;
  VertexSet witness;
  bool exact = true;
};

inline constexpr int kCheegerExactMaxN = 24;

inline long long edge_boundary(const RegularGraph& g, std::span<const Vertex> s) {
  std::vector<char> in(g.n(), 0);
  for (Vertex v : s) in[v] = 1;
  long long cut = 0;
  for (Vertex v : s)
    for (Vertex w : g.neighbors(v))
      if (!in[w]) ++cut;
  return cut;
}

// Exhaustive Gray-code scan over subsets with |S| <= n/2.
inline CheegerResult cheeger_exact(const RegularGraph& g) {
  const int n = g.n();
  if (n > kCheegerExactMaxN)
    throw PreconditionError("cheeger_exact: n > 24; use cheeger_upper for a heuristic upper bound");
  std::vector<std::uint32_t> nbr(n, 0);
  for (Vertex v = 0; v < n; ++v)
    for (Vertex w : g.neighbors(v)) nbr[v] |= 1u << w;
  const int d = g.d();
  std::uint32_t mask = 0;
  long long cut = 0;
  int size = 0;
  long long best_cut = -1;
  int best_size = 1;
  std::uint32_t best_mask = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    int v = std::countr_zero(i);
    std::uint32_t bit = 1u << v;
    int inside = std::popcount(nbr[v] & mask);
    if (mask & bit) {
      mask ^= bit;
      cut -= d - 2 * inside;
      --size;
    } else {
      cut += d - 2 * inside;
      mask |= bit;
      ++size;
    }
    if (2 * size > n) continue;
    if (best_cut < 0 || cut * best_size < best_cut * size ||
        (cut * best_size == best_cut * size && mask < best_mask)) {
      best_cut = cut;
      best_size = size;
      best_mask = mask;
    }
  }
  CheegerResult r;
  r.h = make_rational(best_cut, best_size);
  for (Vertex v = 0; v < n; ++v)
    if (best_mask >> v & 1u) r.witness.push_back(v);
  return r;
}

// Heuristic upper bound on h(G): sweep cuts along BFS orders from random roots
// and, when affordable, along the second eigenvector.
inline CheegerResult cheeger_upper(const RegularGraph& g, int trials, Rng& rng) {
  const int n = g.n();
  const int d = g.d();
  CheegerResult best;
  best.exact = false;
  best.h = {-1, 1};
  auto sweep = [&](const std::vector<Vertex>& order) {
    std::vector<char> in(n, 0);
    long long cut = 0;
    for (int k = 0; 2 * (k + 1) <= n; ++k) {
      Vertex v = order[k];
      int inside = 0;
      for (Vertex w : g.neighbors(v)) inside += in[w];
      cut += d - 2 * inside;
      in[v] = 1;
      long long size = k + 1;
      if (best.h.num < 0 || cut * best.h.den < best.h.num * size) {
        best.h = make_rational(cut, size);
        best.witness.assign(order.begin(), order.begin() + size);
        std::sort(best.witness.begin(), best.witness.end());
      }
    }
  };
  for (int t = 0; t < trials; ++t) {
    Vertex root = static_cast<Vertex>(rng.below(n));
    Vertex src[] = {root};
    auto dist = bfs_distances(g, src);
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) { return dist[a] < dist[b]; });
    sweep(order);
  }
  if (n <= 1500) {
    auto eig = symmetric_eigen(adjacency_matrix(g), true);
    std::vector<Vertex> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int sgn : {1, -1}) {
      std::stable_sort(order.begin(), order.end(),
                       [&](Vertex a, Vertex b) { return sgn * eig.vectors(a, n - 2) < sgn * eig.vectors(b, n - 2); });
      sweep(order);
    }
  }
  if (best.h.num < 0) throw PreconditionError("cheeger_upper: no candidate sets");
  return best;
}

struct SandwichReport {
  double lower = 0.0;  // (d - lambda2)/2
  double h = 0.0;
  double upper = 0.0;  // sqrt(2d(d - lambda2))
  bool h_exact = true;
  bool lower_holds = true;  // not evaluated when h is only an upper bound
  bool upper_holds = true;
  double lower_slack = 0.0;
  double upper_slack = 0.0;
  bool holds() const { return lower_holds && upper_holds; }
};

inline SandwichReport cheeger_sandwich_check(const RegularGraph& g, std::optional<double> lambda2 = std::nullopt,
                                             std::uint64_t seed = 1) {
  const double d = g.d();
  double l2 = lambda2 ? *lambda2 : eigen_summary(g).lambda2;
  SandwichReport r;
  r.lower = (d - l2) / 2.0;
  r.upper = std::sqrt(std::max(0.0, 2.0 * d * (d - l2)));
  const double tol = 1e-9;
  if (g.n() <= kCheegerExactMaxN) {
    r.h = cheeger_exact(g).h.value();
    r.lower_holds = r.lower <= r.h + tol;
    r.lower_slack = r.h - r.lower;
  } else {
    Rng rng(seed);
    r.h = cheeger_upper(g, 16, rng).h.value();
    r.h_exact = false;
  }
  r.upper_holds = r.h <= r.upper + tol;
  r.upper_slack = r.upper - r.h;
  return r;
}

struct FriedmanReport {
  double lambda = 0.0;
  double lambda2 = 0.0;
  double friedman_bound = 0.0;  // 2 sqrt(d-1) + slack
  double threshold_2_1 = 0.0;   // 2.1 sqrt(d-1)
  bool friedman = false;        // lambda(G) <= friedman_bound
  bool threshold_passes = false;  // lambda(G) <= 2.1 sqrt(d-1)
  bool lambda2_gate = false;      // lambda_2 <= 2.1 sqrt(d-1); the weaker one-sided gate
};

inline FriedmanReport friedman_check(const SpectralSummary& s, int d, double slack) {
  FriedmanReport r;
  r.lambda = s.lambda;
  r.lambda2 = s.lambda2;
  r.friedman_bound = 2.0 * std::sqrt(d - 1.0) + slack;
  r.threshold_2_1 = 2.1 * std::sqrt(d - 1.0);
  r.friedman = s.lambda <= r.friedman_bound;
  r.threshold_passes = s.lambda <= r.threshold_2_1;
  r.lambda2_gate = s.lambda2 <= r.threshold_2_1;
  return r;
}

inline FriedmanReport friedman_check(const RegularGraph& g, double slack) {
  return friedman_check(eigen_summary(g), g.d(), slack);
}

inline std::vector<double> apply_adjacency(const RegularGraph& g, std::span<const double> x) {
  std::vector<double> y(g.n(), 0.0);
  for (Vertex v = 0; v < g.n(); ++v) {
    double s = 0.0;
    for (Vertex w : g.neighbors(v)) s += x[w];
    y[v] = s;
  }
  return y;
}

struct WalkSumReport {
  int ell = 0;
  double value = 0.0;  // ||sum_{k=1}^ell A^k y||^2
  double bound = 0.0;  // 4 (4.41 (d-1))^ell
  bool holds = false;
};

inline WalkSumReport walk_sum_bound_check(const RegularGraph& g, std::span<const double> y, int ell, double lambda) {
  if (static_cast<int>(y.size()) != g.n()) throw PreconditionError("walk_sum_bound_check: dimension mismatch");
  if (ell < 1) throw PreconditionError("walk_sum_bound_check: need ell >= 1");
  double norm2 = 0.0, sum = 0.0;
  for (double x : y) {
    norm2 += x * x;
    sum += x;
  }
  if (std::fabs(std::sqrt(norm2) - 1.0) > 1e-9) throw PreconditionError("walk_sum_bound_check: ||y|| != 1");
  if (std::fabs(sum) > 1e-9 * std::sqrt(static_cast<double>(g.n())))
    throw PreconditionError("walk_sum_bound_check: y is not mean-zero");
  const int d = g.d();
  if (lambda > 2.1 * std::sqrt(d - 1.0)) throw PreconditionError("walk_sum_bound_check: lambda(G) > 2.1 sqrt(d-1)");
  std::vector<double> cur(y.begin(), y.end()), acc(g.n(), 0.0);
  for (int k = 1; k <= ell; ++k) {
    cur = apply_adjacency(g, cur);
    for (int i = 0; i < g.n(); ++i) acc[i] += cur[i];
  }
  WalkSumReport r;
  r.ell = ell;
  for (double x : acc) r.value += x * x;
  r.bound = 4.0 * std::pow(4.41 * (d - 1), ell);
  r.holds = r.value <= r.bound;
  return r;
}

}  // namespace gapcert
