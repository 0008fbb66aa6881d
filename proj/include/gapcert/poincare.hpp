#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "expansion.hpp"
#include "graph.hpp"
#include "norms.hpp"
#include "rng.hpp"
#include "spectral.hpp"

namespace gapcert {

// f: V -> R^k, row-major.
class VectorField {
 public:
  VectorField() = default;
  VectorField(int n, int k) : n_(n), k_(k), values_(static_cast<std::size_t>(n) * k, 0.0) {
    if (n < 1 || k < 1) throw std::invalid_argument("VectorField: need n >= 1 and k >= 1");
  }
  static VectorField scalar(std::span<const double> xs) {
    VectorField f(static_cast<int>(xs.size()), 1);
    std::copy(xs.begin(), xs.end(), f.values_.begin());
    return f;
  }
  static VectorField from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("VectorField: no rows");
    VectorField f(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int v = 0; v < f.n_; ++v) {
      if (static_cast<int>(rows[v].size()) != f.k_) throw std::invalid_argument("VectorField: ragged rows");
      std::copy(rows[v].begin(), rows[v].end(), f.row(v).begin());
    }
    return f;
  }

  int n() const { return n_; }
  int k() const { return k_; }
  std::span<double> row(int v) { return {values_.data() + static_cast<std::size_t>(v) * k_, static_cast<std::size_t>(k_)}; }
  std::span<const double> row(int v) const {
    return {values_.data() + static_cast<std::size_t>(v) * k_, static_cast<std::size_t>(k_)};
  }
  double& operator()(int v, int j) { return values_[static_cast<std::size_t>(v) * k_ + j]; }
  double operator()(int v, int j) const { return values_[static_cast<std::size_t>(v) * k_ + j]; }
  const std::vector<double>& values() const { return values_; }
  void scale(double t) {
    for (double& x : values_) x *= t;
  }

  bool is_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
  }
  bool is_constant() const {
    for (int v = 1; v < n_; ++v)
      if (!std::equal(row(v).begin(), row(v).end(), row(0).begin())) return false;
    return true;
  }

 private:
  int n_ = 0;
  int k_ = 0;
  std::vector<double> values_;
};

struct PoincareQuery {
  UncondNorm norm = UncondNorm::lq(2.0);
  double p = 2.0;
};

struct RatioReport {
  double numerator = 0.0;    // (1/n^2) sum over ordered pairs
  double denominator = 0.0;  // (1/|E|) sum over edges
  double ratio = 0.0;
  VectorField best;
  long long evaluations = 0;
};

namespace detail {

inline double diff_norm_p(const UncondNorm& nm, double p, std::span<const double> a, std::span<const double> b,
                          std::vector<double>& buf) {
  for (std::size_t i = 0; i < a.size(); ++i) buf[i] = a[i] - b[i];
  double x = nm(buf);
  return p == 1.0 ? x : (p == 2.0 ? x * x : std::pow(x, p));
}

}  // namespace detail

inline RatioReport poincare_ratio(const RegularGraph& g, const VectorField& f, const PoincareQuery& q) {
  if (!(q.p >= 1.0)) throw std::invalid_argument("poincare_ratio: need p >= 1");
  if (f.n() != g.n()) throw std::invalid_argument("poincare_ratio: field size does not match graph");
  if (!f.is_finite()) throw std::invalid_argument("poincare_ratio: non-finite field entries");
  if (f.is_constant()) throw PreconditionError("poincare_ratio: constant field (degenerate ratio)");
  const int n = g.n();
  std::vector<double> buf(f.k());
  double num = 0.0;
  for (int v = 0; v < n; ++v)
    for (int w = v + 1; w < n; ++w) num += detail::diff_norm_p(q.norm, q.p, f.row(v), f.row(w), buf);
  num *= 2.0;  // ordered pairs; v = w terms vanish
  double den = 0.0;
  for (const Edge& e : g.edges()) den += detail::diff_norm_p(q.norm, q.p, f.row(e.u), f.row(e.v), buf);
  RatioReport r;
  r.numerator = num / (static_cast<double>(n) * n);
  r.denominator = den / static_cast<double>(g.edge_count());
  if (r.denominator == 0.0) throw PreconditionError("poincare_ratio: edge average vanishes (graph disconnected?)");
  r.ratio = r.numerator / r.denominator;
  r.best = f;
  r.evaluations = 1;
  return r;
}

struct ScalarGammaReport {
  double certified = 0.0;      // d/(d - lambda2), infinite when disconnected
  double closed_form = 0.0;   // d/(2(d - lambda2)), reported for comparison
  double eigvec_ratio = 0.0;   // poincare_ratio at the second eigenvector
  double lambda2 = 0.0;
  bool connected = true;
};

inline ScalarGammaReport gamma_scalar_l2_exact(const RegularGraph& g) {
  ScalarGammaReport r;
  const double d = g.d();
  const int n = g.n();
  auto eig = symmetric_eigen(adjacency_matrix(g), true);
  r.lambda2 = eig.values[n - 2];
  r.connected = is_connected(g);
  if (!r.connected) {
    r.certified = r.closed_form = r.eigvec_ratio = std::numeric_limits<double>::infinity();
    return r;
  }
  r.certified = d / (d - r.lambda2);
  r.closed_form = d / (2.0 * (d - r.lambda2));
  std::vector<double> x(n);
  for (int v = 0; v < n; ++v) x[v] = eig.vectors(v, n - 2);
  r.eigvec_ratio = poincare_ratio(g, VectorField::scalar(x), {UncondNorm::lq(2.0), 2.0}).ratio;
  return r;
}

namespace detail {

// Field plus running pair/edge sums, with O(n) single-vertex moves.
class RatioState {
 public:
  RatioState(const RegularGraph& g, const PoincareQuery& q, VectorField f)
      : g_(g), q_(q), f_(std::move(f)), buf_(f_.k()), cand_(f_.k()) {
    recompute();
  }

  void recompute() {
    const int n = g_.n();
    num_ = 0.0;
    for (int v = 0; v < n; ++v)
      for (int w = v + 1; w < n; ++w) num_ += 2.0 * diff_norm_p(q_.norm, q_.p, f_.row(v), f_.row(w), buf_);
    den_ = 0.0;
    for (const Edge& e : g_.edges()) den_ += diff_norm_p(q_.norm, q_.p, f_.row(e.u), f_.row(e.v), buf_);
  }

  double ratio_of(double num, double den) const {
    if (!(den > 0.0)) return -std::numeric_limits<double>::infinity();
    const double n = g_.n();
    return (num / (n * n)) / (den / static_cast<double>(g_.edge_count()));
  }
  double ratio() const { return ratio_of(num_, den_); }

  // Ratio after replacing f(v) by x, without committing.
  std::pair<double, double> trial(int v, std::span<const double> x) {
    double dn = 0.0, dd = 0.0;
    const auto old = f_.row(v);
    for (int w = 0; w < g_.n(); ++w) {
      if (w == v) continue;
      dn += diff_norm_p(q_.norm, q_.p, x, f_.row(w), buf_) - diff_norm_p(q_.norm, q_.p, old, f_.row(w), buf_);
    }
    for (Vertex w : g_.neighbors(v))
      dd += diff_norm_p(q_.norm, q_.p, x, f_.row(w), buf_) - diff_norm_p(q_.norm, q_.p, old, f_.row(w), buf_);
    return {num_ + 2.0 * dn, den_ + dd};
  }

  void commit(int v, std::span<const double> x, std::pair<double, double> sums) {
    std::copy(x.begin(), x.end(), f_.row(v).begin());
    num_ = sums.first;
    den_ = sums.second;
    if (++commits_ % 512 == 0) {
      // The ratio is invariant under translation and scaling; keep values
      // near unit spread so long runs of neutral moves cannot overflow.
      const double sp = spread();
      if (sp > 1e8 || sp < 1e-8) normalize();
      recompute();
    }
  }

  void normalize() {
    const double sp = spread();
    for (int j = 0; j < f_.k(); ++j) {
      double mean = 0.0;
      for (int v = 0; v < f_.n(); ++v) mean += f_(v, j);
      mean /= f_.n();
      for (int v = 0; v < f_.n(); ++v) f_(v, j) = (f_(v, j) - mean) / sp;
    }
  }

  const VectorField& field() const { return f_; }
  std::vector<double>& cand() { return cand_; }

  double spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : f_.values()) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return hi > lo ? hi - lo : 1.0;
  }

 private:
  const RegularGraph& g_;
  const PoincareQuery& q_;
  VectorField f_;
  std::vector<double> buf_, cand_;
  double num_ = 0.0, den_ = 0.0;
  long long commits_ = 0;
};

}  // namespace detail

struct SearchOptions {
  int restarts = 4;
  double anneal_fraction = 0.3;
};

// Lower bound on gamma(G, ||.||^p) by local search over fields: annealed
// random coordinate moves, then a greedy pattern search with step halving and
// moves that copy another vertex's value. Budget counts ratio evaluations.
inline RatioReport gamma_search(const RegularGraph& g, const PoincareQuery& q, int k, long long budget, Rng& rng,
                                const VectorField* init = nullptr, SearchOptions opt = {}) {
  if (budget <= 0) throw std::invalid_argument("gamma_search: budget must be positive");
  if (k < 1) throw std::invalid_argument("gamma_search: need k >= 1");
  if (!(q.p >= 1.0)) throw std::invalid_argument("gamma_search: need p >= 1");
  const int n = g.n();
  if (init && (init->n() != n || init->k() != k)) throw std::invalid_argument("gamma_search: init has wrong shape");
  RatioReport best;
  best.ratio = -std::numeric_limits<double>::infinity();
  long long used = 0;
  auto consider = [&](const detail::RatioState& st) {
    double r = st.ratio();
    if (r > best.ratio) {
      best.ratio = r;
      best.best = st.field();
    }
  };
  if (init && !init->is_constant()) {
    best = poincare_ratio(g, *init, q);
    ++used;
  }
  const int restarts = std::max(1, opt.restarts);
  for (int rs = 0; rs < restarts && used < budget; ++rs) {
    const long long share = (budget - used) / (restarts - rs);
    const long long stop = used + std::max<long long>(share, 1);
    VectorField start(n, k);
    if (rs == 0 && init && !init->is_constant()) {
      start = *init;
    } else {
      do {
        for (int v = 0; v < n; ++v)
          for (int j = 0; j < k; ++j) start(v, j) = rng.normal();
      } while (start.is_constant());
    }
    detail::RatioState st(g, q, start);
    auto& cand = st.cand();
    consider(st);
    VectorField local = st.field();
    double local_ratio = st.ratio();

    // Annealing on the log ratio.
    const long long anneal = static_cast<long long>(opt.anneal_fraction * static_cast<double>(stop - used));
    const long long anneal_end = used + anneal;
    double temp = 0.1;
    const double cool = anneal > 0 ? std::pow(1e-3, 1.0 / static_cast<double>(anneal)) : 1.0;
    while (used < anneal_end) {
      ++used;
      int v = static_cast<int>(rng.below(n));
      int j = static_cast<int>(rng.below(k));
      auto row = st.field().row(v);
      std::copy(row.begin(), row.end(), cand.begin());
      cand[j] += 0.3 * st.spread() * rng.normal();
      auto sums = st.trial(v, cand);
      double r_new = st.ratio_of(sums.first, sums.second);
      double r_old = st.ratio();
      if (r_new >= r_old || (r_new > 0 && rng.uniform() < std::exp((std::log(r_new) - std::log(r_old)) / temp))) {
        st.commit(v, cand, sums);
        consider(st);
        if (st.ratio() > local_ratio) {
          local_ratio = st.ratio();
          local = st.field();
        }
      }
      temp *= cool;
    }

    // Greedy pattern search from the best field of this restart.
    detail::RatioState gs(g, q, local);
    auto& gc = gs.cand();
    double step = 0.25 * gs.spread();
    const double floor_step = 1e-13 * gs.spread();
    auto try_move = [&](int v) {
      ++used;
      auto sums = gs.trial(v, gc);
      if (gs.ratio_of(sums.first, sums.second) > gs.ratio()) {
        gs.commit(v, gc, sums);
        return true;
      }
      return false;
    };
    while (used < stop && step > floor_step) {
      bool improved = false;
      for (int v = 0; v < n && used < stop; ++v) {
        for (int j = 0; j < k && used < stop; ++j) {
          for (double sgn : {1.0, -1.0}) {
            auto row = gs.field().row(v);
            std::copy(row.begin(), row.end(), gc.begin());
            gc[j] += sgn * step;
            if (try_move(v)) {
              improved = true;
              break;
            }
          }
        }
        // Copying a neighbour's value reaches the piecewise-constant optima
        // that matter for p = 1.
        for (Vertex w : g.neighbors(v)) {
          if (used >= stop) break;
          auto src = gs.field().row(w);
          if (std::equal(src.begin(), src.end(), gs.field().row(v).begin())) continue;
          std::copy(src.begin(), src.end(), gc.begin());
          if (try_move(v)) improved = true;
        }
      }
      if (!improved) step *= 0.5;
      consider(gs);
    }
    gs.recompute();
    consider(gs);
  }
  if (best.best.n() != n) throw ResourceError("gamma_search: budget exhausted before any evaluation");
  RatioReport out = poincare_ratio(g, best.best, q);
  out.evaluations = used;
  return out;
}

struct DistanceStats {
  long long sum = 0;            // over ordered pairs
  double avg_all = 0.0;         // sum / n^2
  double avg_distinct = 0.0;    // sum / (n(n-1))
  int diameter = 0;
};

inline std::vector<std::vector<int>> all_pairs_distances(const RegularGraph& g) {
  std::vector<std::vector<int>> out(g.n());
  for (Vertex v = 0; v < g.n(); ++v) {
    Vertex src[] = {v};
    out[v] = bfs_distances(g, src);
  }
  return out;
}

inline DistanceStats distance_stats(const RegularGraph& g) {
  DistanceStats s;
  const double n = g.n();
  for (Vertex v = 0; v < g.n(); ++v) {
    Vertex src[] = {v};
    for (int x : bfs_distances(g, src)) {
      if (x == kInfDist) throw PreconditionError("distance_stats: graph is disconnected");
      s.sum += x;
      s.diameter = std::max(s.diameter, x);
    }
  }
  s.avg_all = static_cast<double>(s.sum) / (n * n);
  s.avg_distinct = static_cast<double>(s.sum) / (n * (n - 1));
  return s;
}

struct EmbeddingReport {
  VectorField f;          // rescaled so that dist <= ||f(v) - f(w)||_q
  int scales = 0;
  int trials = 0;
  double distortion = 0.0;
  double max_stretch = 0.0;       // after rescaling; min stretch is 1
  double max_edge_stretch = 0.0;  // max over edges of ||f(v) - f(w)||_q
  double avg_dist = 0.0;          // (1/n^2) sum dist
  RatioReport gamma_lower;        // poincare_ratio of f under l_q, p = 1
};

// Coordinates min(dist(v, A), 2^i) for random A of density 2^-i, i = 1..scales.
// scales = 0 picks ceil(log2 diam) + 1, trials = 0 picks ceil(ln n).
inline EmbeddingReport bourgain_style_embedding(const RegularGraph& g, double q, int scales, int trials, Rng& rng) {
  if (!is_connected(g)) throw PreconditionError("bourgain_style_embedding: graph is disconnected");
  const int n = g.n();
  auto dist = all_pairs_distances(g);
  int diam = 0;
  for (const auto& row : dist) diam = std::max(diam, *std::max_element(row.begin(), row.end()));
  if (scales <= 0) scales = static_cast<int>(std::ceil(std::log2(std::max(1, diam)))) + 1;
  if (trials <= 0) trials = static_cast<int>(std::ceil(std::log(static_cast<double>(n))));
  EmbeddingReport r;
  r.scales = scales;
  r.trials = trials;
  r.f = VectorField(n, scales * trials);
  int col = 0;
  for (int i = 1; i <= scales; ++i) {
    const double density = std::ldexp(1.0, -i);
    const double cap = std::ldexp(1.0, i);
    for (int t = 0; t < trials; ++t, ++col) {
      std::vector<Vertex> a;
      for (Vertex v = 0; v < n; ++v)
        if (rng.bernoulli(density)) a.push_back(v);
      std::vector<int> da = a.empty() ? std::vector<int>(n, kInfDist) : bfs_distances(g, std::span<const Vertex>(a));
      for (Vertex v = 0; v < n; ++v) r.f(v, col) = std::min(static_cast<double>(da[v]), cap);
    }
  }
  const UncondNorm nm = UncondNorm::lq(q);
  std::vector<double> buf(r.f.k());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int v = 0; v < n; ++v)
    for (int w = v + 1; w < n; ++w) {
      double s = detail::diff_norm_p(nm, 1.0, r.f.row(v), r.f.row(w), buf) / dist[v][w];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  if (lo == 0.0) {
    r.distortion = std::numeric_limits<double>::infinity();
    r.max_stretch = std::numeric_limits<double>::infinity();
    return r;
  }
  r.f.scale(1.0 / lo);
  r.distortion = hi / lo;
  r.max_stretch = hi / lo;
  for (const Edge& e : g.edges())
    r.max_edge_stretch = std::max(r.max_edge_stretch, detail::diff_norm_p(nm, 1.0, r.f.row(e.u), r.f.row(e.v), buf));
  long long sum = 0;
  for (const auto& row : dist)
    for (int x : row) sum += x;
  r.avg_dist = static_cast<double>(sum) / (static_cast<double>(n) * n);
  r.gamma_lower = poincare_ratio(g, r.f, {nm, 1.0});
  return r;
}

struct UcParams {
  double C = 20.0;
  double K = 20.0;
  double distortion = 1.0;  // assumed embedding distortion D
  std::optional<ExpanParams> expan;  // defaults to the nominal parameters at d
};

struct UcRow {
  int n = 0;
  int d = 0;
  double avg_dist = 0.0;  // (1/n^2) sum dist
  double avg_dist_distinct = 0.0;
  double log_d_n = 0.0;
  double edge_avg = 1.0;
  double ln_q_bound_raw = 0.0;  // ln of (avg_dist / (D * Gamma|_{q=1}))^{1/10}
  double q_lower_bound = 2.0;   // max(2, exp(ln_q_bound_raw))
  std::vector<std::pair<double, double>> ln_gamma;  // (q, ln Gamma(q))
};

// avg_dist <= gamma * D <= Gamma(q) * D, and Gamma is q^10 times a
// q-free factor, so q >= (avg_dist / (D * Gamma|_{q=1}))^{1/10}.
inline UcRow uc_row(const RegularGraph& g, std::span<const double> q_grid, const UcParams& p) {
  UcRow row;
  row.n = g.n();
  row.d = g.d();
  auto ds = distance_stats(g);
  row.avg_dist = ds.avg_all;
  row.avg_dist_distinct = ds.avg_distinct;
  row.log_d_n = std::log(static_cast<double>(g.n())) / std::log(static_cast<double>(g.d()));
  ExpanParams ep = p.expan ? *p.expan : ExpanParams::nominal(g.d());
  LogScalar g2 = gamma_constant(2.0, p.C, p.K, g.d(), ep.alpha, ep.eps, ep.L);
  double ln_gamma_q1 = g2.ln() - 10.0 * std::log(2.0);
  row.ln_q_bound_raw = (std::log(row.avg_dist) - std::log(p.distortion) - ln_gamma_q1) / 10.0;
  row.q_lower_bound = std::max(2.0, std::exp(row.ln_q_bound_raw));
  for (double q : q_grid) row.ln_gamma.push_back({q, gamma_constant(q, p.C, p.K, g.d(), ep.alpha, ep.eps, ep.L).ln()});
  return row;
}

inline std::vector<UcRow> uc_experiment(std::span<const RegularGraph> family, std::span<const double> q_grid,
                                        const UcParams& p) {
  std::vector<UcRow> rows;
  for (const auto& g : family) rows.push_back(uc_row(g, q_grid, p));
  return rows;
}

}  // namespace gapcert
