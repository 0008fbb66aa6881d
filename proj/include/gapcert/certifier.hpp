#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"
#include "expansion.hpp"
#include "graph.hpp"
#include "log_scalar.hpp"
#include "norms.hpp"
#include "poincare.hpp"
#include "spectral.hpp"

namespace gapcert {

// Relative slack for comparing floating sums that are equal in exact
// arithmetic (sandwich inequalities, ratio vs bound).
inline constexpr double kCertRelTol = 1e-12;

// ---------------------------------------------------------------- fields

inline bool median_condition(const VectorField& f) {
  const int n = f.n();
  for (int j = 0; j < f.k(); ++j) {
    int ge = 0, le = 0;
    for (int v = 0; v < n; ++v) {
      ge += f(v, j) >= 0.0;
      le += f(v, j) <= 0.0;
    }
    if (2 * ge < n || 2 * le < n) return false;
  }
  return true;
}

// Subtracts the coordinatewise lower median.
inline VectorField median_translate(const VectorField& f) {
  VectorField out = f;
  std::vector<double> col(f.n());
  for (int j = 0; j < f.k(); ++j) {
    for (int v = 0; v < f.n(); ++v) col[v] = f(v, j);
    auto mid = col.begin() + (f.n() - 1) / 2;
    std::nth_element(col.begin(), mid, col.end());
    for (int v = 0; v < f.n(); ++v) out(v, j) -= *mid;
  }
  return out;
}

// f: [n] -> {-1,0,1}^k
class BinaryField {
 public:
  explicit BinaryField(const VectorField& f) : n_(f.n()), k_(f.k()), vals_(f.values().size()) {
    bool nonzero = false;
    for (std::size_t i = 0; i < vals_.size(); ++i) {
      double x = f.values()[i];
      if (x != -1.0 && x != 0.0 && x != 1.0) throw PreconditionError("BinaryField: entries must lie in {-1,0,1}");
      vals_[i] = static_cast<signed char>(x);
      nonzero |= x != 0.0;
    }
    if (!nonzero) throw PreconditionError("BinaryField: identically zero field");
    median_ok_ = median_condition(f);
  }
  int n() const { return n_; }
  int k() const { return k_; }
  int operator()(int v, int j) const { return vals_[static_cast<std::size_t>(v) * k_ + j]; }
  bool median_ok() const { return median_ok_; }
  VectorField to_field() const {
    VectorField f(n_, k_);
    for (int v = 0; v < n_; ++v)
      for (int j = 0; j < k_; ++j) f(v, j) = (*this)(v, j);
    return f;
  }

 private:
  int n_, k_;
  std::vector<signed char> vals_;
  bool median_ok_ = false;
};

// -------------------------------------------------------- binary encoding

struct BinaryEncoding {
  double delta = 0.0;  // quarter of the smallest nonzero coordinate gap
  int m = 0;           // ceil(max |f| / delta)
  VectorField encoded;  // dimension k m, sign-run unary code per coordinate
  UncondNorm lifted = UncondNorm::lq(1.0);  // X(l1^m)
  double node_lhs = 0.0;  // delta sum ||f~(v)||
  double node_rhs = 0.0;  // sum ||f(v)||
  double edge_lhs = 0.0;  // delta sum_edges ||f~(w) - f~(w')||
  double edge_rhs = 0.0;  // 3/2 sum_edges ||f(w) - f(w')||
  bool node_ok = false;
  bool edge_ok = false;
};

inline constexpr std::size_t kMaxEncodedEntries = 50'000'000;

inline BinaryEncoding binary_encode(const RegularGraph& g, const VectorField& f, const UncondNorm& nm) {
  if (f.n() != g.n()) throw std::invalid_argument("binary_encode: field size does not match graph");
  if (f.is_constant()) throw PreconditionError("binary_encode: constant field (delta undefined)");
  const int n = f.n(), k = f.k();
  double gap = std::numeric_limits<double>::infinity();
  double top = 0.0;
  std::vector<double> col(n);
  for (int j = 0; j < k; ++j) {
    for (int v = 0; v < n; ++v) {
      col[v] = f(v, j);
      top = std::max(top, std::fabs(col[v]));
    }
    std::sort(col.begin(), col.end());
    for (int v = 1; v < n; ++v)
      if (col[v] != col[v - 1]) gap = std::min(gap, col[v] - col[v - 1]);
  }
  BinaryEncoding e;
  e.delta = gap / 4.0;
  const double mm = std::ceil(top / e.delta);
  if (mm * k * n > static_cast<double>(kMaxEncodedEntries))
    throw ResourceError("binary_encode: encoded field too large (m = " + std::to_string(mm) + ")");
  e.m = static_cast<int>(mm);
  e.encoded = VectorField(n, k * e.m);
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < k; ++j) {
      double x = f(v, j);
      if (x == 0.0) continue;
      int run = std::min(e.m, static_cast<int>(std::ceil(std::fabs(x) / e.delta)));
      for (int s = 0; s < run; ++s) e.encoded(v, j * e.m + s) = x > 0 ? 1.0 : -1.0;
    }
  e.lifted = UncondNorm::lifted_l1(nm, k, e.m);
  for (int v = 0; v < n; ++v) {
    e.node_lhs += e.lifted(e.encoded.row(v));
    e.node_rhs += nm(f.row(v));
  }
  e.node_lhs *= e.delta;
  std::vector<double> df(k), dt(static_cast<std::size_t>(k) * e.m);
  for (const Edge& ed : g.edges()) {
    for (int j = 0; j < k; ++j) df[j] = f(ed.u, j) - f(ed.v, j);
    for (std::size_t i = 0; i < dt.size(); ++i) dt[i] = e.encoded(ed.u, static_cast<int>(i)) - e.encoded(ed.v, static_cast<int>(i));
    e.edge_lhs += e.lifted(dt);
    e.edge_rhs += nm(df);
  }
  e.edge_lhs *= e.delta;
  e.edge_rhs *= 1.5;
  e.node_ok = e.node_lhs >= e.node_rhs * (1.0 - kCertRelTol);
  e.edge_ok = e.edge_lhs <= e.edge_rhs * (1.0 + kCertRelTol);
  return e;
}

// ------------------------------------------------------------ assertions

struct Tally {
  std::string name;
  long long checked = 0;
  long long failed = 0;
  std::string first_failure;
  bool passed() const { return failed == 0; }
};

class AssertionLog {
 public:
  template <class Describe>
  bool check(const std::string& name, bool ok, Describe&& describe) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      it = index_.emplace(name, tallies_.size()).first;
      tallies_.push_back(Tally{name, 0, 0, {}});
    }
    Tally& t = tallies_[it->second];
    ++t.checked;
    if (!ok && t.failed++ == 0) t.first_failure = describe();
    return ok;
  }
  bool check(const std::string& name, bool ok) {
    return check(name, ok, [] { return std::string(); });
  }
  const std::vector<Tally>& tallies() const { return tallies_; }
  bool all_passed() const {
    return std::all_of(tallies_.begin(), tallies_.end(), [](const Tally& t) { return t.passed(); });
  }
  const Tally* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &tallies_[it->second];
  }

 private:
  std::vector<Tally> tallies_;
  std::map<std::string, std::size_t> index_;
};

// --------------------------------------------------------------- jumps

namespace detail {

inline double ln_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

// floor(log2 x) for x > 0, exact at powers of two.
inline int floor_log2(double x) {
  int e = 0;
  std::frexp(x, &e);
  return e - 1;
}

inline std::vector<int> edge_dists_from(const RegularGraph& g, std::span<const Vertex> s) {
  auto vd = bfs_distances(g, s);
  std::vector<int> out(g.edge_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = edge_dist(vd, g.edges()[i]);
  return out;
}

}  // namespace detail

// E(S, j; ell): edges within distance ell-1 of S whose endpoints differ in coordinate j.
inline std::vector<Edge> jump_edges(const RegularGraph& g, const BinaryField& f, int j, std::span<const Vertex> s,
                                    int ell) {
  if (s.empty()) throw PreconditionError("jump_edges: empty S");
  if (ell < 1) throw PreconditionError("jump_edges: need ell >= 1");
  if (j < 0 || j >= f.k()) throw std::out_of_range("jump_edges: coordinate out of range");
  auto ed = detail::edge_dists_from(g, s);
  std::vector<Edge> out;
  for (std::size_t i = 0; i < ed.size(); ++i) {
    const Edge& e = g.edges()[i];
    if (ed[i] <= ell - 1 && f(e.u, j) != f(e.v, j)) out.push_back(e);
  }
  return out;
}

struct JumpWitness {
  bool found = false;
  int ell0 = 0;
  long long count = 0;  // |E(S, j; ell0)|
  int ell_cap = 0;      // min{ell : alpha (d-1)^ell |S| >= 3n/4}
};

inline JumpWitness jump_witness(const RegularGraph& g, const BinaryField& f, int j, std::span<const Vertex> s,
                                      const LogScalar& alpha) {
  if (s.empty()) throw PreconditionError("jump_witness: empty S");
  const int val = f(s[0], j);
  for (Vertex v : s)
    if (f(v, j) != val || val == 0) throw PreconditionError("jump_witness: f_j must be equal and nonzero on S");
  const int n = g.n(), d = g.d();
  const double ln_dm1 = std::log(d - 1.0);
  const double ln_s = std::log(static_cast<double>(s.size()));
  JumpWitness w;
  w.ell_cap = 1;
  while (alpha.ln() + w.ell_cap * ln_dm1 + ln_s < std::log(0.75 * n)) ++w.ell_cap;
  auto ed = detail::edge_dists_from(g, s);
  for (int ell = 1; ell <= w.ell_cap; ++ell) {
    long long cnt = 0;
    for (std::size_t i = 0; i < ed.size(); ++i) {
      const Edge& e = g.edges()[i];
      cnt += ed[i] <= ell - 1 && f(e.u, j) != f(e.v, j);
    }
    double thr = alpha.ln() + std::log(a_seq(ell) / 6.0) + (ell - 1) * ln_dm1 + ln_s;
    if (cnt > 0 && std::log(static_cast<double>(cnt)) >= thr) {
      w.found = true;
      w.ell0 = ell;
      w.count = cnt;
      return w;
    }
  }
  return w;
}

// ------------------------------------------------------------- ledger

struct ScaleLedger {
  int n = 0, d = 0, k = 0, edges = 0;
  double q = 2.0, C = 1.0;
  ExpanParams params;
  LogScalar ltilde, c, chat, cprime;
  std::vector<signed char> f;               // n x k
  std::vector<int> edist;                   // n x |E|, edge distance from v
  std::vector<std::vector<char>> jump;      // k x |E|
  std::vector<int> ell;                     // n x k; ell_{v,j}, 0 where f(v)_j = 0
  int ell_max = 0;
  std::map<std::tuple<int, int, int>, std::vector<Vertex>> classes;  // (j, ell, sign) -> V_sign(j; ell)
  long long crossover = 1;                  // greedy ell_0
  std::vector<std::vector<int>> etilde;     // n x k; selected edge indices, sorted
  std::vector<char> selected_by_greedy;     // per class index order, informative
  // mutual supports
  std::vector<std::map<int, std::vector<int>>> support;    // v -> ell -> J(v, ell)
  std::vector<std::map<int, double>> support_norm;         // ||chi_{J(v,ell)}||
  std::vector<std::map<int, std::vector<std::pair<int, double>>>> edge_support;  // (edge, ||chi_{J(v,ell,e)}||)

  int fv(int v, int j) const { return f[static_cast<std::size_t>(v) * k + j]; }
  int ed(int v, int e) const { return edist[static_cast<std::size_t>(v) * edges + e]; }
  int& ell_at(int v, int j) { return ell[static_cast<std::size_t>(v) * k + j]; }
  int ell_at(int v, int j) const { return ell[static_cast<std::size_t>(v) * k + j]; }
};

// ell_0 of the greedy step: least ell such that every ell' >= ell has
// L (d-1-eps)^ell' < (alpha a_ell' / 12) (d-1)^{ell'-1}. Saturates at LLONG_MAX.
inline long long greedy_crossover(int d, const ExpanParams& p) {
  const double c1 = std::log((d - 1.0) / (d - 1.0 - p.eps));
  const double c0 = p.alpha.ln() - std::log(12.0) + std::log(6.0 / (std::numbers::pi * std::numbers::pi)) -
                    std::log(d - 1.0) - p.L.ln();
  auto h = [&](double ell) { return ell * c1 - 2.0 * std::log(ell) + c0; };
  const double turn = std::max(1.0, std::ceil(2.0 / c1));
  if (h(turn) > 0.0) return 1;  // h decreases up to 2/c1, so positive throughout
  double lo = turn, hi = turn;
  while (h(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 9.0e18) return LLONG_MAX;
  }
  while (hi - lo > 1.0) {
    double mid = std::floor((lo + hi) / 2.0);
    (h(mid) > 0.0 ? hi : lo) = mid;
  }
  return static_cast<long long>(hi);
}

inline ScaleLedger scale_index(const RegularGraph& g, const BinaryField& f, double q, double C,
                               const ExpanParams& params, AssertionLog& log) {
  params.validate();
  if (f.n() != g.n()) throw std::invalid_argument("scale_index: field size does not match graph");
  ScaleLedger L;
  L.n = g.n();
  L.d = g.d();
  L.k = f.k();
  L.edges = static_cast<int>(g.edge_count());
  L.q = q;
  L.C = C;
  L.params = params;
  L.ltilde = ltilde_constant(L.d, params.L, params.alpha, params.eps);
  L.c = c_constant(params.alpha, L.d);
  L.chat = chat_constant(params.alpha, L.d, C, q, L.ltilde);
  L.cprime = cprime_constant(L.chat, params.eps, q, L.d);
  L.f.resize(static_cast<std::size_t>(L.n) * L.k);
  for (int v = 0; v < L.n; ++v)
    for (int j = 0; j < L.k; ++j) L.f[static_cast<std::size_t>(v) * L.k + j] = static_cast<signed char>(f(v, j));
  L.edist.resize(static_cast<std::size_t>(L.n) * L.edges);
  for (Vertex v = 0; v < L.n; ++v) {
    Vertex src[] = {v};
    auto row = detail::edge_dists_from(g, src);
    std::copy(row.begin(), row.end(), L.edist.begin() + static_cast<std::ptrdiff_t>(v) * L.edges);
  }
  L.jump.assign(L.k, std::vector<char>(L.edges, 0));
  for (int e = 0; e < L.edges; ++e) {
    const Edge& ed = g.edges()[e];
    for (int j = 0; j < L.k; ++j) L.jump[j][e] = f(ed.u, j) != f(ed.v, j);
  }
  L.ell.assign(static_cast<std::size_t>(L.n) * L.k, 0);
  L.etilde.assign(static_cast<std::size_t>(L.n) * L.k, {});
  const double ln_a = params.alpha.ln();
  const double ln_dm1 = std::log(L.d - 1.0);
  const double ln_34n = std::log(0.75 * L.n);
  std::vector<long long> hist(L.n + 1);
  for (Vertex v = 0; v < L.n; ++v) {
    for (int j = 0; j < L.k; ++j) {
      if (L.fv(v, j) == 0) continue;
      std::fill(hist.begin(), hist.end(), 0);
      for (int e = 0; e < L.edges; ++e)
        if (L.jump[j][e] && L.ed(v, e) != kInfDist) ++hist[L.ed(v, e)];
      long long cum = 0;
      int found = 0;
      for (int ell = 1; ell <= L.n; ++ell) {
        cum += hist[ell - 1];
        double thr = ln_a + std::log(a_seq(ell) / 6.0) + (ell - 1) * ln_dm1;
        if (cum > 0 && std::log(static_cast<double>(cum)) >= thr) {
          found = ell;
          break;
        }
      }
      log.check("scale_index_defined", found > 0, [&] {
        return "ell_{v,j} undefined within ell <= n for v=" + std::to_string(v) + " j=" + std::to_string(j) +
               " (part-A counterevidence at this alpha)";
      });
      if (!found) continue;
      L.ell_at(v, j) = found;
      L.ell_max = std::max(L.ell_max, found);
      L.classes[{j, found, L.fv(v, j)}].push_back(v);
      log.check("scale_vertex_bound", ln_a + (found - 1) * ln_dm1 <= ln_34n, [&] {
        return "alpha (d-1)^(ell-1) > 3n/4 at v=" + std::to_string(v) + " j=" + std::to_string(j);
      });
    }
  }
  for (const auto& [key, vs] : L.classes) {
    auto [j, ell, sg] = key;
    log.check("scale_class_bound", ln_a + (ell - 1) * ln_dm1 + std::log(double(vs.size())) <= ln_34n, [&] {
      return "alpha (d-1)^(ell-1) |V| > 3n/4 at j=" + std::to_string(j) + " ell=" + std::to_string(ell);
    });
  }
  L.crossover = greedy_crossover(L.d, params);
  return L;
}

struct GreedyOptions {
  bool force_selection = false;  // run the iterative selection even below the crossover
};

struct GreedyResult {
  bool wholesale = true;
  int steps = 0;
  long long max_multiplicity = 0;
  bool partB_failed = false;
};

// Builds E~(v, j) for v in V_sign(j; ell).
inline GreedyResult greedy_disjointify(ScaleLedger& L, const RegularGraph& g, int j, int ell, int sign,
                                       AssertionLog& log, GreedyOptions opt = {}) {
  auto it = L.classes.find({j, ell, sign});
  if (it == L.classes.end() || it->second.empty()) throw PreconditionError("greedy_disjointify: empty class");
  const std::vector<Vertex>& V = it->second;
  const double ln_dm1 = std::log(L.d - 1.0);
  const double ln_p1 = L.params.alpha.ln() + std::log(a_seq(ell) / 12.0) + (ell - 1) * ln_dm1;
  const LogScalar tau = partB_threshold(L.d, L.params, ell);
  auto jump_near = [&](Vertex v) {
    std::vector<int> out;
    for (int e = 0; e < L.edges; ++e)
      if (L.jump[j][e] && L.ed(v, e) <= ell - 1) out.push_back(e);
    return out;
  };
  GreedyResult res;
  if (static_cast<long long>(ell) < L.crossover && !opt.force_selection) {
    for (Vertex v : V) L.etilde[static_cast<std::size_t>(v) * L.k + j] = jump_near(v);
  } else {
    res.wholesale = false;
    std::vector<Vertex> R = V;
    std::vector<int> cnt(L.edges, 0);
    std::vector<std::vector<int>> near(L.n);
    for (Vertex v : R) {
      near[v] = jump_near(v);
      for (int e : near[v]) ++cnt[e];
    }
    while (!R.empty()) {
      ExpanVerdict inst;
      try {
        inst = partB_check_instance(g, R, ell, L.params);
      } catch (const PreconditionError& ex) {
        inst.verdict = Verdict::Fail;
      }
      if (!log.check("greedy_partB_instance", inst.verdict == Verdict::Pass, [&] {
            return "no admissible v_t for j=" + std::to_string(j) + " ell=" + std::to_string(ell) +
                   " |R|=" + std::to_string(R.size()) + " (part-B counterevidence)";
          })) {
        res.partB_failed = true;
        break;
      }
      const Vertex vt = inst.chosen;
      std::vector<int>& sel = L.etilde[static_cast<std::size_t>(vt) * L.k + j];
      sel.clear();
      for (int e : near[vt])
        if (!(ls(cnt[e]) >= tau)) sel.push_back(e);  // E(v_t) minus E_t
      log.check("greedy_P1", !sel.empty() && std::log(double(sel.size())) >= ln_p1, [&] {
        return "|E~(v_t,j)| below alpha a_ell/12 (d-1)^(ell-1) at v=" + std::to_string(vt);
      });
      // P2: pairs (v, e) in G_t with v still unselected are counted by cnt.
      for (int e : sel)
        log.check("greedy_P2", ls(cnt[e]) <= tau, [&] { return "edge " + std::to_string(e) + " over L(d-1-eps)^ell"; });
      for (int e : near[vt]) --cnt[e];
      R.erase(std::find(R.begin(), R.end(), vt));
      ++res.steps;
    }
  }
  const LogScalar bound = L.ltilde * ls(L.d - 1.0 - L.params.eps).pow(ell);
  std::vector<int> mult(L.edges, 0);
  for (Vertex v : V) {
    const auto& sel = L.etilde[static_cast<std::size_t>(v) * L.k + j];
    for (int e : sel) {
      ++mult[e];
      log.check("ledger_edge_within_radius", L.jump[j][e] && L.ed(v, e) <= ell - 1,
                [&] { return "E~(v,j) not inside E(v,j;ell) at v=" + std::to_string(v); });
    }
  }
  for (int e = 0; e < L.edges; ++e) {
    res.max_multiplicity = std::max<long long>(res.max_multiplicity, mult[e]);
    if (mult[e] > 0)
      log.check("greedy_multiplicity", ls(mult[e]) <= bound, [&] {
        return "edge " + std::to_string(e) + " in " + std::to_string(mult[e]) + " families > Ltilde (d-1-eps)^ell";
      });
  }
  return res;
}

// Fills J(v, ell), its norm, and (edge, ||chi_{J(v,ell,e)}||) lists.
inline void mutual_supports(ScaleLedger& L, const UncondNorm& nm, AssertionLog& log) {
  L.support.assign(L.n, {});
  L.support_norm.assign(L.n, {});
  L.edge_support.assign(L.n, {});
  std::vector<double> chi(L.k);
  for (Vertex v = 0; v < L.n; ++v) {
    int nonzero = 0, covered = 0;
    for (int j = 0; j < L.k; ++j) {
      if (L.fv(v, j) == 0) continue;
      ++nonzero;
      if (L.ell_at(v, j) > 0) {
        L.support[v][L.ell_at(v, j)].push_back(j);
        ++covered;
      }
    }
    log.check("partition_identity", nonzero == covered,
              [&] { return "supp f(v) not covered by J(v, .) at v=" + std::to_string(v); });
    for (const auto& [ell, J] : L.support[v]) {
      std::fill(chi.begin(), chi.end(), 0.0);
      for (int j : J) chi[j] = 1.0;
      L.support_norm[v][ell] = nm(chi);
      // edge -> J(v, ell, e)
      std::map<int, std::vector<int>> by_edge;
      for (int j : J)
        for (int e : L.etilde[static_cast<std::size_t>(v) * L.k + j]) by_edge[e].push_back(j);
      auto& out = L.edge_support[v][ell];
      for (const auto& [e, js] : by_edge) {
        std::fill(chi.begin(), chi.end(), 0.0);
        for (int j : js) chi[j] = 1.0;
        out.push_back({e, nm(chi)});
      }
    }
  }
  // |{v : j in J(v, ell, e)}| <= 2 Ltilde (d-1-eps)^ell
  std::map<std::tuple<int, int, int>, int> count;  // (j, ell, e)
  for (Vertex v = 0; v < L.n; ++v)
    for (int j = 0; j < L.k; ++j) {
      int ell = L.ell_at(v, j);
      if (ell == 0) continue;
      for (int e : L.etilde[static_cast<std::size_t>(v) * L.k + j]) ++count[{j, ell, e}];
    }
  for (const auto& [key, c] : count) {
    int ell = std::get<1>(key);
    LogScalar bound = ls(2.0) * L.ltilde * ls(L.d - 1.0 - L.params.eps).pow(ell);
    log.check("support_multiplicity", ls(c) <= bound, [&] { return "count " + std::to_string(c) + " > 2 Ltilde (d-1-eps)^ell"; });
  }
}

struct NearEdgeReport {
  int v = 0, ell = 0, b = 0;
  long long near_edges = 0;  // |{e : dist(v, e) <= ell - 1}|
  bool near_bounds_ok = false;
  long long qualifying = 0;  // edges with ||chi_{J(v,ell,e)}|| >= c a_ell 2^b
  LogScalar needed;          // c a_ell (d-1)^ell
  bool holds = false;
};

inline NearEdgeReport near_edge_check(const ScaleLedger& L, int v, int ell, int b) {
  NearEdgeReport r;
  r.v = v;
  r.ell = ell;
  r.b = b;
  auto sn = L.support_norm[v].find(ell);
  if (sn == L.support_norm[v].end() || sn->second < std::ldexp(1.0, b))
    throw PreconditionError("near_edge_check: need ||chi_J(v,ell)|| >= 2^b");
  for (int e = 0; e < L.edges; ++e) r.near_edges += L.ed(v, e) <= ell - 1;
  const double ln_dm1 = std::log(L.d - 1.0);
  const double ln_near = std::log(static_cast<double>(r.near_edges));
  r.near_bounds_ok = L.params.alpha.ln() + (ell - 1) * ln_dm1 <= ln_near &&
                     ln_near <= std::log(2.0 * L.d) + (ell - 1) * ln_dm1;
  const double thr = L.c.ln() + std::log(a_seq(ell)) + b * kLn2;
  for (const auto& [e, nrm] : L.edge_support[v].at(ell)) r.qualifying += detail::ln_or_neg_inf(nrm) >= thr;
  r.needed = L.c * ls(a_seq(ell)) * ls(L.d - 1.0).pow(ell);
  r.holds = r.qualifying > 0 && ls(double(r.qualifying)) >= r.needed;
  return r;
}

struct DichotomyReport {
  int b = 0, ell = 0;
  long long m_size = 0;                 // |M(b, ell)|
  long long count_i = 0;                // edges over chat a_ell 2^b
  LogScalar need_i;                     // |M| / a_ell^2
  long long count_ii = 0;               // edges over chat a_ell^3 2^b r^{ell/q}
  LogScalar need_ii;                    // chat a_ell |M|
  bool branch_i = false, branch_ii = false;
  char branch = '-';                    // 'i', 'ii' as "2", or '-' when neither
  long long e_prime = 0;                // |E'|
  long long heavy = 0;                  // edges in E' with many v
  long long cotype_split_runs = 0;
  long long cotype_split_vacuous = 0;
  bool holds() const { return branch_i || branch_ii; }
};

struct DichotomyOptions {
  int cotype_split_max_edges = 16;
  int cotype_split_cotype_max_m = 6;
};

inline DichotomyReport dichotomy_check(const ScaleLedger& L, const RegularGraph& g, const UncondNorm& nm, int b, int ell,
                                       std::span<const double> edge_norms, AssertionLog& log,
                                       DichotomyOptions opt = {}) {
  DichotomyReport r;
  r.b = b;
  r.ell = ell;
  const double a = a_seq(ell);
  const double ln_a = std::log(a);
  std::vector<Vertex> M;
  for (Vertex v = 0; v < L.n; ++v) {
    auto it = L.support_norm[v].find(ell);
    if (it != L.support_norm[v].end() && it->second >= std::ldexp(1.0, b)) M.push_back(v);
  }
  r.m_size = static_cast<long long>(M.size());
  if (M.empty()) {  // vacuous, branch (i) by convention
    r.branch_i = true;
    r.branch = 'i';
    return r;
  }
  const double ln_m = std::log(static_cast<double>(M.size()));
  const double ln_r = std::log((L.d - 1.0) / (L.d - 1.0 - L.params.eps));
  const double thr_i = L.chat.ln() + ln_a + b * kLn2;
  const double thr_ii = L.chat.ln() + 3 * ln_a + b * kLn2 + ell / L.q * ln_r;
  for (double x : edge_norms) {
    double lx = detail::ln_or_neg_inf(x);
    r.count_i += lx >= thr_i;
    r.count_ii += lx >= thr_ii;
  }
  r.need_i = LogScalar::from_log(ln_m - 2 * ln_a);
  r.need_ii = LogScalar::from_log(L.chat.ln() + ln_a + ln_m);
  r.branch_i = r.count_i > 0 && ls(double(r.count_i)) >= r.need_i;
  r.branch_ii = r.count_ii > 0 && ls(double(r.count_ii)) >= r.need_ii;
  r.branch = r.branch_i ? 'i' : (r.branch_ii ? '2' : '-');

  // The proof's intermediate objects: E_v, E', multiplicities, heavy edges.
  const double thr_c = L.c.ln() + ln_a + b * kLn2;
  std::vector<int> mult(L.edges, 0);
  std::map<int, std::vector<Vertex>> users;
  for (Vertex v : M) {
    for (const auto& [e, nrm] : L.edge_support[v].at(ell)) {
      if (detail::ln_or_neg_inf(nrm) < thr_c) continue;
      ++mult[e];
      users[e].push_back(v);
      log.check("support_containment", edge_norms[e] >= nrm * (1.0 - kCertRelTol),
                [&] { return "||f(w)-f(w')|| < ||chi_J(v,ell,e)|| at edge " + std::to_string(e); });
    }
  }
  const LogScalar local_bound = ls(2.0 / (L.d - 2.0)) * ls(L.d - 1.0).pow(ell);
  for (const auto& [e, vs] : users) {
    ++r.e_prime;
    log.check("local_multiplicity", ls(double(vs.size())) <= local_bound,
              [&] { return "edge " + std::to_string(e) + " in too many E_v"; });
  }
  const double ln_heavy = L.c.ln() - std::log(4.0) + 3 * ln_a + ell * std::log(L.d - 1.0);
  std::vector<int> heavy;
  for (const auto& [e, vs] : users)
    if (std::log(double(vs.size())) >= ln_heavy) heavy.push_back(e);
  r.heavy = static_cast<long long>(heavy.size());
  const bool eprime_small = !(r.e_prime > 0 && std::log(double(r.e_prime)) >= ln_m - 2 * ln_a);
  if (eprime_small) {
    log.check("heavy_edges",
              r.heavy > 0 && std::log(double(r.heavy)) >= L.c.ln() - std::log(4.0) + ln_a + ln_m,
              [&] { return "fewer than c/4 a_ell |M| heavy edges at b=" + std::to_string(b) + " ell=" + std::to_string(ell); });
    // Almost-disjoint supports on heavy edges.
    const double ln_scale = thr_c;  // projections normalised by c a_ell 2^b
    const LogScalar overlap_cap = ls(2.0) * L.ltilde * ls(L.d - 1.0 - L.params.eps).pow(ell);
    int runs = 0;
    for (int e : heavy) {
      if (runs >= opt.cotype_split_max_edges) break;
      ++runs;
      const Edge& ed = g.edges()[e];
      RestrictedFamily fam;
      fam.x.assign(L.k, 0.0);
      for (int j = 0; j < L.k; ++j)
        if (L.fv(ed.u, j) != L.fv(ed.v, j)) fam.x[j] = 1.0;
      std::vector<int> cover(L.k, 0);
      for (Vertex v : users[e]) {
        std::vector<int> J;
        for (int j : L.support[v].at(ell))
          if (std::binary_search(L.etilde[static_cast<std::size_t>(v) * L.k + j].begin(),
                                 L.etilde[static_cast<std::size_t>(v) * L.k + j].end(), e))
            J.push_back(j);
        for (int j : J) ++cover[j];
        fam.J.push_back(std::move(J));
      }
      const double m = static_cast<double>(fam.J.size());
      const int max_cover = *std::max_element(cover.begin(), cover.end());
      fam.delta = max_cover / m;
      log.check("support_overlap", ls(double(max_cover)) <= overlap_cap,
                [&] { return "coordinate overlap above 2 Ltilde (d-1-eps)^ell at edge " + std::to_string(e); });
      const double ln_x_norm = std::log(nm(fam.x));
      if (ln_scale < -600.0 || ln_scale > 600.0) {
        // Rescaled x is not representable; compare in log space.
        ++r.cotype_split_vacuous;
        double lhs = L.q * (ln_x_norm - ln_scale);
        double rhs = -L.q * std::log(L.C) - std::log(fam.delta) - (2 * L.q + 5) * kLn2;
        log.check("cotype_split", lhs >= rhs, [&] { return "cotype split bound fails (log space) at edge " + std::to_string(e); });
        continue;
      }
      const double s = std::exp(-ln_scale);
      for (double& x : fam.x) x *= s;
      auto rep = cotype_split_check(nm, fam, L.q, L.C, true, opt.cotype_split_cotype_max_m);
      ++r.cotype_split_runs;
      log.check("cotype_split_preconditions", rep.projections_ok && rep.overlap_ok && rep.nonnegative_ok,
                [&] { return "cotype split preconditions fail at edge " + std::to_string(e); });
      if (rep.cotype_verified)
        log.check("cotype_split_restricted_cotype", rep.cotype_ok,
                  [&] { return "restricted cotype fails on support family at edge " + std::to_string(e); });
      log.check("cotype_split", rep.holds, [&] { return "cotype split bound fails at edge " + std::to_string(e); });
    }
  }
  log.check("dichotomy", r.holds(), [&] {
    return "neither branch holds at b=" + std::to_string(b) + " ell=" + std::to_string(ell) +
           " (pipeline falsification)";
  });
  return r;
}

// ---------------------------------------------------------------- certify

enum class PartAStatus { Exact, SpectralCertified, Assumed, Failed };
enum class PartBStatus { Exact, SpectralSufficient, InstancesOnly, Failed };

inline const char* to_string(PartAStatus s) {
  switch (s) {
    case PartAStatus::Exact: return "exact";
    case PartAStatus::SpectralCertified: return "spectral_certified";
    case PartAStatus::Assumed: return "assumed";
    case PartAStatus::Failed: return "failed";
  }
  return "?";
}
inline const char* to_string(PartBStatus s) {
  switch (s) {
    case PartBStatus::Exact: return "exact";
    case PartBStatus::SpectralSufficient: return "spectral_sufficient";
    case PartBStatus::InstancesOnly: return "instances_only";
    case PartBStatus::Failed: return "failed";
  }
  return "?";
}

enum class ParamMode { Nominal, Fitted };
inline const char* to_string(ParamMode m) { return m == ParamMode::Nominal ? "paper" : "fitted"; }

struct ParamChoice {
  ParamMode mode = ParamMode::Nominal;
  ExpanParams params;
  PartAStatus part_a = PartAStatus::Assumed;
  PartBStatus part_b = PartBStatus::InstancesOnly;
  LogScalar alpha_certified;  // spectral or exact lower bound used to vouch for alpha
};

inline constexpr int kFitLMaxN = 16;

// Nominal parameters, or instance-fitted alpha* (exact fit for n <= 20, the
// spectral bound above that) and the least L passing part B exactly.
inline ParamChoice choose_params(const RegularGraph& g, ParamMode mode) {
  ParamChoice pc;
  pc.mode = mode;
  const int n = g.n(), d = g.d();
  const bool small = n <= kExactSubsetMaxN;
  double lambda = small ? 0.0 : eigen_summary(g).lambda;
  if (mode == ParamMode::Nominal) {
    pc.params = ExpanParams::nominal(d);
  } else {
    pc.params.alpha = small ? partA_fit_alpha(g) : partA_certified_alpha(g, lambda);
    if (pc.params.alpha.is_zero()) throw PreconditionError("choose_params: graph is disconnected");
    pc.params.eps = eps_nominal();
    pc.params.L = LogScalar::one();
  }
  if (small) {
    pc.alpha_certified = partA_fit_alpha(g);
    pc.part_a = partA_check_exact(g, pc.params.alpha).passed() ? PartAStatus::Exact : PartAStatus::Failed;
  } else {
    pc.alpha_certified = partA_certified_alpha(g, lambda);
    pc.part_a = pc.params.alpha <= pc.alpha_certified ? PartAStatus::SpectralCertified : PartAStatus::Assumed;
  }
  if (n <= kFitLMaxN) {
    if (mode == ParamMode::Fitted && !partB_check_exact(g, pc.params).passed()) {
      double lo = 0.0, hi = L_nominal(d).ln();
      ExpanParams t = pc.params;
      t.L = LogScalar::from_log(hi);
      if (!partB_check_exact(g, t).passed()) {
        pc.part_b = PartBStatus::Failed;
        pc.params.L = t.L;
        return pc;
      }
      for (int it = 0; it < 80 && hi - lo > 1e-9 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        t.L = LogScalar::from_log(mid);
        (partB_check_exact(g, t).passed() ? hi : lo) = mid;
      }
      pc.params.L = LogScalar::from_log(hi);
    }
    pc.part_b = partB_check_exact(g, pc.params).passed() ? PartBStatus::Exact : PartBStatus::Failed;
  } else if (mode == ParamMode::Nominal && d >= 6 && partB_spectral_sufficient(g).verdict == Verdict::Pass) {
    pc.part_b = PartBStatus::SpectralSufficient;
  }
  return pc;
}

struct ScaleRow {
  int ell = 0;
  long long vertices = 0;      // v with J(v, ell) nonempty
  double sum_support = 0.0;    // sum_v ||P_J(v,ell) f(v)||
  LogScalar lhs;               // 4 sum_edges ||f(w) - f(w')||
  LogScalar rhs;               // (c'/a_ell) sum_support
  bool holds = false;
  std::vector<DichotomyReport> levels;
};

struct CertOptions {
  GreedyOptions greedy;
  DichotomyOptions dichotomy;
  int restricted_cotype_exact_max = 12;  // distinct projections checked exactly
};

struct CertReport {
  ParamChoice params;
  double q = 2.0, C = 1.0, p = 1.0;
  int n = 0, d = 0, k = 0;
  bool real_input = false;
  LogScalar pi, four_over_cprime, ltilde, c, chat, cprime;
  long long crossover = 0;
  std::string restricted_cotype;  // "verified" / "assumed"
  // binary-level (encoded for real input)
  double sum_nodes = 0.0, sum_edges = 0.0, ratio = 0.0;
  bool ratio_le_recombination = false;  // ratio <= 4/c'
  bool ratio_le_pi = false;
  // real input
  std::optional<BinaryEncoding> encoding;
  double real_sum_nodes = 0.0, real_sum_edges = 0.0, real_ratio = 0.0;
  bool real_ratio_ok = false;  // <= 3 Pi / 2
  // extrapolation for p > 1
  LogScalar p_lhs, p_rhs;
  bool p_holds = true;
  std::vector<ScaleRow> scales;
  AssertionLog log;
  bool all_passed() const { return log.all_passed(); }
};

namespace detail {

inline std::vector<double> edge_norm_list(const RegularGraph& g, const VectorField& f, const UncondNorm& nm) {
  std::vector<double> out;
  out.reserve(g.edge_count());
  std::vector<double> buf(f.k());
  for (const Edge& e : g.edges()) {
    for (int j = 0; j < f.k(); ++j) buf[j] = f(e.u, j) - f(e.v, j);
    out.push_back(nm(buf));
  }
  return out;
}

inline void run_binary_pipeline(CertReport& R, const RegularGraph& g, const BinaryField& bf, const UncondNorm& nm,
                                 const CertOptions& opt) {
  AssertionLog& log = R.log;
  const ExpanParams& P = R.params.params;
  log.check("median_condition", bf.median_ok(), [] { return std::string("0 is not an empirical median"); });
  log.check("part_A", R.params.part_a != PartAStatus::Failed,
            [] { return std::string("part A of the expansion property fails at alpha"); });
  log.check("part_B", R.params.part_b != PartBStatus::Failed,
            [] { return std::string("part B of the expansion property fails at (alpha, eps, L)"); });
  if (R.params.mode == ParamMode::Nominal)
    log.check("alpha_nominal_le_certified", P.alpha <= R.params.alpha_certified);

  // Restricted cotype on the distinct projections chi_A, A within supp f(v).
  {
    std::vector<std::vector<double>> fam;
    std::map<std::vector<double>, int> seen;
    bool too_many = false;
    for (int v = 0; v < bf.n() && !too_many; ++v) {
      std::vector<int> supp;
      for (int j = 0; j < bf.k(); ++j)
        if (bf(v, j) != 0) supp.push_back(j);
      if (supp.size() > 20) {
        too_many = true;
        break;
      }
      for (std::uint32_t s = 1; s < (1u << supp.size()); ++s) {
        std::vector<double> x(bf.k(), 0.0);
        for (std::size_t i = 0; i < supp.size(); ++i)
          if (s >> i & 1u) x[supp[i]] = 1.0;
        if (seen.emplace(x, 0).second) fam.push_back(std::move(x));
        if (static_cast<int>(fam.size()) > opt.restricted_cotype_exact_max) {
          too_many = true;
          break;
        }
      }
    }
    if (too_many) {
      R.restricted_cotype = "assumed";
    } else {
      Rng rng(0);
      R.restricted_cotype = "verified";
      log.check("restricted_cotype", restricted_cotype_check(nm, fam, R.q, R.C, 0, rng).verdict == Verdict::Pass,
                [] { return std::string("projection family lacks restricted cotype (q, C)"); });
    }
  }

  ScaleLedger L = scale_index(g, bf, R.q, R.C, P, log);
  R.ltilde = L.ltilde;
  R.c = L.c;
  R.chat = L.chat;
  R.cprime = L.cprime;
  R.crossover = L.crossover;
  R.four_over_cprime = ls(4.0) / L.cprime;
  log.check("L_le_Ltilde", P.L <= L.ltilde);
  log.check("chat_le_c_over_4", L.chat <= L.c / ls(4.0));
  log.check("cprime_le_chat", L.cprime <= L.chat);

  for (const auto& [key, vs] : L.classes) {
    auto [j, ell, sg] = key;
    greedy_disjointify(L, g, j, ell, sg, log, opt.greedy);
  }
  mutual_supports(L, nm, log);

  const VectorField F = bf.to_field();
  const auto enorm = edge_norm_list(g, F, nm);
  for (double x : enorm) R.sum_edges += x;
  for (int v = 0; v < bf.n(); ++v) R.sum_nodes += nm(F.row(v));
  const LogScalar lhs_edges = ls(4.0) * ls(R.sum_edges);

  for (int ell = 1; ell <= L.ell_max; ++ell) {
    ScaleRow row;
    row.ell = ell;
    std::vector<int> levels;
    for (Vertex v = 0; v < L.n; ++v) {
      auto it = L.support_norm[v].find(ell);
      if (it == L.support_norm[v].end()) continue;
      ++row.vertices;
      row.sum_support += it->second;
      int b = floor_log2(it->second);
      levels.push_back(b);
      auto ne = near_edge_check(L, v, ell, b);
      log.check("near_edge_bounds", ne.near_bounds_ok,
                [&] { return "alpha (d-1)^(ell-1) <= |E~| <= 2d(d-1)^(ell-1) fails at v=" + std::to_string(v); });
      log.check("near_edge_count", ne.holds, [&] {
        return "fewer than c a_ell (d-1)^ell qualifying edges at v=" + std::to_string(v) + " ell=" + std::to_string(ell);
      });
    }
    if (row.vertices == 0) continue;
    const double ln_r = std::log((L.d - 1.0) / (L.d - 1.0 - P.eps));
    log.check("cprime_scale_inequality",
              5 * std::log(a_seq(ell)) + ell / R.q * ln_r >= 10 * std::log(P.eps / (10.0 * R.q * L.d)));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (auto it = levels.rbegin(); it != levels.rend(); ++it)
      row.levels.push_back(dichotomy_check(L, g, nm, *it, ell, enorm, log, opt.dichotomy));
    row.lhs = lhs_edges;
    row.rhs = L.cprime / ls(a_seq(ell)) * ls(row.sum_support);
    row.holds = row.rhs <= row.lhs;
    log.check("per_scale", row.holds, [&] { return "4 sum ||df|| < (c'/a_ell) sum ||P_J f|| at ell=" + std::to_string(ell); });
    R.scales.push_back(std::move(row));
  }

  R.ratio = R.sum_edges > 0 ? R.sum_nodes / R.sum_edges : std::numeric_limits<double>::infinity();
  const LogScalar ratio_ls = ls(R.ratio);
  R.ratio_le_recombination = std::isfinite(R.ratio) && ratio_ls <= R.four_over_cprime;
  R.ratio_le_pi = std::isfinite(R.ratio) && ratio_ls <= R.pi;
  log.check("recombination_bound", R.ratio_le_recombination,
            [&] { return "sum ||f(v)|| > (4/c') sum_edges ||df||, ratio " + fmt_double(R.ratio); });
  log.check("final_pi_bound", R.ratio_le_pi, [&] { return "ratio " + fmt_double(R.ratio) + " exceeds Pi"; });
}

// (3 Pi/2)^p d^{p-1} max(2,p)^p
inline LogScalar extrapolation_constant(const LogScalar& pi, double p, int d) {
  return (ls(1.5) * pi).pow(p) * ls(double(d)).pow(p - 1.0) * ls(std::max(2.0, p)).pow(p);
}

inline void check_extrapolation(CertReport& R, const RegularGraph& g, const VectorField& f, const UncondNorm& nm,
                                const LogScalar& base) {
  if (R.p <= 1.0) return;
  double lhs = 0.0, rhs = 0.0;
  for (int v = 0; v < f.n(); ++v) lhs += std::pow(nm(f.row(v)), R.p);
  for (double x : edge_norm_list(g, f, nm)) rhs += std::pow(x, R.p);
  R.p_lhs = ls(lhs);
  R.p_rhs = extrapolation_constant(base, R.p, g.d()) * ls(rhs);
  R.p_holds = R.p_lhs <= R.p_rhs;
  R.log.check("extrapolation_p", R.p_holds, [] { return std::string("p-th power bound fails"); });
}

}  // namespace detail

// Replays the pipeline on a {-1,0,1}-valued field.
inline CertReport certify_binary(const RegularGraph& g, const BinaryField& f, const UncondNorm& nm, double q, double C,
                                 const ParamChoice& params, double p = 1.0, const CertOptions& opt = {}) {
  if (f.n() != g.n()) throw std::invalid_argument("certify: field size does not match graph");
  if (!(p >= 1.0)) throw std::invalid_argument("certify: need p >= 1");
  CertReport R;
  R.params = params;
  R.q = q;
  R.C = C;
  R.p = p;
  R.n = g.n();
  R.d = g.d();
  R.k = f.k();
  R.pi = pi_constant(q, C, g.d(), params.params.alpha, params.params.eps, params.params.L);
  detail::run_binary_pipeline(R, g, f, nm, opt);
  detail::check_extrapolation(R, g, f.to_field(), nm, R.pi);
  return R;
}

// Real-valued fields: translate by the lower median, encode, run the binary
// pipeline on the encoding under X(l1^m), then check the 3 Pi/2 bound.
inline CertReport certify(const RegularGraph& g, const VectorField& f_in, const UncondNorm& nm, double q, double C,
                          const ParamChoice& params, double p = 1.0, const CertOptions& opt = {}) {
  if (f_in.n() != g.n()) throw std::invalid_argument("certify: field size does not match graph");
  bool binary = std::all_of(f_in.values().begin(), f_in.values().end(),
                            [](double x) { return x == -1.0 || x == 0.0 || x == 1.0; });
  if (binary && median_condition(f_in)) return certify_binary(g, BinaryField(f_in), nm, q, C, params, p, opt);
  if (f_in.is_constant()) throw PreconditionError("certify: constant field");
  VectorField f = median_translate(f_in);
  CertReport R;
  R.params = params;
  R.q = q;
  R.C = C;
  R.p = p;
  R.n = g.n();
  R.d = g.d();
  R.k = f.k();
  R.real_input = true;
  R.pi = pi_constant(q, C, g.d(), params.params.alpha, params.params.eps, params.params.L);
  R.log.check("median_after_translation", median_condition(f));
  BinaryEncoding enc = binary_encode(g, f, nm);
  R.log.check("encode_node_sandwich", enc.node_ok, [&] {
    return "delta sum ||f~|| = " + fmt_double(enc.node_lhs) + " < sum ||f|| = " + fmt_double(enc.node_rhs);
  });
  R.log.check("encode_edge_sandwich", enc.edge_ok, [&] {
    return "delta sum ||df~|| = " + fmt_double(enc.edge_lhs) + " > 1.5 sum ||df|| = " + fmt_double(enc.edge_rhs);
  });
  BinaryField bf(enc.encoded);
  detail::run_binary_pipeline(R, g, bf, enc.lifted, opt);
  for (int v = 0; v < f.n(); ++v) R.real_sum_nodes += nm(f.row(v));
  for (double x : detail::edge_norm_list(g, f, nm)) R.real_sum_edges += x;
  R.real_ratio = R.real_sum_edges > 0 ? R.real_sum_nodes / R.real_sum_edges : std::numeric_limits<double>::infinity();
  R.real_ratio_ok = std::isfinite(R.real_ratio) && ls(R.real_ratio) <= ls(1.5) * R.pi;
  R.log.check("final_three_halves_pi", R.real_ratio_ok,
              [&] { return "ratio " + fmt_double(R.real_ratio) + " exceeds 3 Pi / 2"; });
  R.encoding = std::move(enc);
  detail::check_extrapolation(R, g, f, nm, R.pi);
  return R;
}

}  // namespace gapcert
