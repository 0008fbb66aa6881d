#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expansion.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace gapcert {

inline constexpr double kInfQ = std::numeric_limits<double>::infinity();

// 1-unconditional norm on R^k as an expression tree:
//   Lq(q)                       any dimension, q in [1, inf]
//   WeightedLq(q, w)            (sum w_j |y_j|^q)^{1/q}, dimension |w|
//   BlockCompose(outer, blocks) outer applied to the vector of block norms
class UncondNorm {
 public:
  enum class Kind { Lq, WeightedLq, Block };

 private:
  struct Node {
    Kind kind;
    double q;
    std::vector<double> w;
    std::shared_ptr<const UncondNorm> outer;
    std::vector<UncondNorm> inner;
    std::vector<std::size_t> sizes;
  };

 public:

  static UncondNorm lq(double q) {
    check_q(q);
    UncondNorm n;
    n.node_ = std::make_shared<Node>(Node{Kind::Lq, q, {}, {}, {}, {}});
    return n;
  }

  static UncondNorm weighted_lq(double q, std::vector<double> w) {
    check_q(q);
    if (w.empty()) throw std::invalid_argument("WeightedLq: empty weight vector");
    for (double x : w)
      if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("WeightedLq: weights must be positive");
    UncondNorm n;
    n.node_ = std::make_shared<Node>(Node{Kind::WeightedLq, q, std::move(w), {}, {}, {}});
    return n;
  }

  static UncondNorm block(const UncondNorm& outer, std::vector<UncondNorm> inner, std::vector<std::size_t> sizes) {
    if (inner.empty() || inner.size() != sizes.size())
      throw std::invalid_argument("BlockCompose: need one size per inner norm");
    for (std::size_t b = 0; b < inner.size(); ++b) {
      if (sizes[b] == 0) throw std::invalid_argument("BlockCompose: empty block");
      if (auto dm = inner[b].dim(); dm && *dm != sizes[b])
        throw std::invalid_argument("BlockCompose: inner norm dimension does not match block size");
    }
    if (auto dm = outer.dim(); dm && *dm != inner.size())
      throw std::invalid_argument("BlockCompose: outer norm dimension does not match block count");
    UncondNorm n;
    n.node_ = std::make_shared<Node>(Node{Kind::Block, 0.0, {}, std::make_shared<UncondNorm>(outer),
                                          std::move(inner), std::move(sizes)});
    return n;
  }

  // X(l1^m): k blocks of l1^m under the outer norm X.
  static UncondNorm lifted_l1(const UncondNorm& x, std::size_t k, std::size_t m) {
    return block(x, std::vector<UncondNorm>(k, lq(1.0)), std::vector<std::size_t>(k, m));
  }

  Kind kind() const { return node_->kind; }
  double q() const { return node_->q; }
  const std::vector<double>& weights() const { return node_->w; }

  std::optional<std::size_t> dim() const {
    switch (node_->kind) {
      case Kind::Lq: return std::nullopt;
      case Kind::WeightedLq: return node_->w.size();
      case Kind::Block: return std::accumulate(node_->sizes.begin(), node_->sizes.end(), std::size_t{0});
    }
    return std::nullopt;
  }

  double operator()(std::span<const double> y) const {
    switch (node_->kind) {
      case Kind::Lq: return lq_eval(node_->q, y, {});
      case Kind::WeightedLq:
        if (y.size() != node_->w.size()) throw std::invalid_argument("WeightedLq: dimension mismatch");
        return lq_eval(node_->q, y, node_->w);
      case Kind::Block: {
        if (y.size() != *dim()) throw std::invalid_argument("BlockCompose: dimension mismatch");
        std::vector<double> inner(node_->inner.size());
        std::size_t off = 0;
        for (std::size_t b = 0; b < inner.size(); ++b) {
          inner[b] = node_->inner[b](y.subspan(off, node_->sizes[b]));
          off += node_->sizes[b];
        }
        return (*node_->outer)(inner);
      }
    }
    return 0.0;
  }

  nlohmann::json to_json() const {
    using nlohmann::json;
    auto qj = [](double q) { return std::isinf(q) ? json("inf") : json(q); };
    switch (node_->kind) {
      case Kind::Lq: return {{"type", "Lq"}, {"q", qj(node_->q)}};
      case Kind::WeightedLq: return {{"type", "WeightedLq"}, {"q", qj(node_->q)}, {"weights", node_->w}};
      case Kind::Block: {
        json blocks = json::array();
        for (std::size_t b = 0; b < node_->inner.size(); ++b)
          blocks.push_back({{"norm", node_->inner[b].to_json()}, {"dim", node_->sizes[b]}});
        return {{"type", "BlockCompose"}, {"outer", node_->outer->to_json()}, {"blocks", blocks}};
      }
    }
    return {};
  }

  static UncondNorm from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw std::invalid_argument("norm JSON: expected object with 'type'");
    auto parse_q = [](const nlohmann::json& v) {
      if (v.is_string()) {
        if (v.get<std::string>() == "inf") return kInfQ;
        throw std::invalid_argument("norm JSON: q must be a number or \"inf\"");
      }
      return v.get<double>();
    };
    const std::string type = j.at("type").get<std::string>();
    if (type == "Lq") return lq(parse_q(j.at("q")));
    if (type == "WeightedLq") return weighted_lq(parse_q(j.at("q")), j.at("weights").get<std::vector<double>>());
    if (type == "BlockCompose") {
      std::vector<UncondNorm> inner;
      std::vector<std::size_t> sizes;
      for (const auto& b : j.at("blocks")) {
        inner.push_back(from_json(b.at("norm")));
        sizes.push_back(b.at("dim").get<std::size_t>());
      }
      return block(from_json(j.at("outer")), std::move(inner), std::move(sizes));
    }
    throw std::invalid_argument("norm JSON: unknown type '" + type + "'");
  }

 private:
  UncondNorm() = default;

  static void check_q(double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("Lq: need q >= 1");
  }

  static double lq_eval(double q, std::span<const double> y, std::span<const double> w) {
    double mx = 0.0;
    for (double yi : y) mx = std::max(mx, std::fabs(yi));
    if (std::isinf(q) || mx == 0.0) return mx;
    double s = 0.0;
    if (q == 1.0) {
      for (std::size_t i = 0; i < y.size(); ++i) s += (w.empty() ? 1.0 : w[i]) * std::fabs(y[i]);
      return s;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      double r = std::fabs(y[i]) / mx;
      s += (w.empty() ? 1.0 : w[i]) * (q == 2.0 ? r * r : std::pow(r, q));
    }
    return mx * (q == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / q));
  }

  std::shared_ptr<const Node> node_;
};

inline double eval_norm(const UncondNorm& nm, std::span<const double> y) { return nm(y); }

// Relative slack used when comparing two floating sums that agree in exact
// arithmetic (equality cases of the cotype inequality).
inline constexpr double kSumRelTol = 1e-12;

using VectorList = std::vector<std::vector<double>>;

namespace detail {

inline std::size_t common_dim(const VectorList& xs) {
  if (xs.empty()) return 0;
  for (const auto& x : xs)
    if (x.size() != xs[0].size()) throw std::invalid_argument("vector family: dimension mismatch");
  return xs[0].size();
}

inline double powq(double x, double q) { return q == 2.0 ? x * x : std::pow(x, q); }

// E over independent signs of ||sum_{i in idx} r_i x_i||^q, exact; the first
// sign is fixed to +1 since the norm is even.
inline double rademacher_moment(const UncondNorm& nm, const VectorList& xs, std::span<const int> idx, double q) {
  const std::size_t k = xs.empty() ? 0 : xs[0].size();
  const int m = static_cast<int>(idx.size());
  if (m == 0) return 0.0;
  std::vector<double> sum(k, 0.0);
  for (int i : idx)
    for (std::size_t c = 0; c < k; ++c) sum[c] += xs[i][c];
  std::vector<int> sign(m, 1);
  const std::uint64_t patterns = std::uint64_t{1} << (m - 1);
  double total = powq(nm(sum), q);
  for (std::uint64_t t = 1; t < patterns; ++t) {
    int b = std::countr_zero(t) + 1;  // bit 0 (the fixed sign) never flips
    const auto& x = xs[idx[b]];
    double f = -2.0 * sign[b];
    for (std::size_t c = 0; c < k; ++c) sum[c] += f * x[c];
    sign[b] = -sign[b];
    total += powq(nm(sum), q);
  }
  return total / static_cast<double>(patterns);
}

}  // namespace detail

struct CotypeResult {
  double raw = 0.0;     // best constant for this family
  double capped = 1.0;  // max(raw, 1), usable as a cotype certificate
  double expectation = 0.0;
  double sum_norms_q = 0.0;
};

inline constexpr int kCotypeExactMaxM = 20;

inline CotypeResult cotype_constant_exact(const UncondNorm& nm, const VectorList& xs, double q) {
  if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("cotype: need finite q >= 1");
  if (static_cast<int>(xs.size()) > kCotypeExactMaxM)
    throw PreconditionError("cotype_constant_exact: m > 20; use cotype_constant_montecarlo (estimate only)");
  detail::common_dim(xs);
  std::vector<int> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  CotypeResult r;
  r.expectation = detail::rademacher_moment(nm, xs, idx, q);
  for (const auto& x : xs) r.sum_norms_q += detail::powq(nm(x), q);
  if (r.sum_norms_q == 0.0) {
    r.raw = 0.0;
  } else if (r.expectation == 0.0) {
    r.raw = kInfQ;
  } else {
    r.raw = std::pow(r.sum_norms_q / r.expectation, 1.0 / q);
  }
  r.capped = std::max(1.0, r.raw);
  return r;
}

struct CotypeEstimate {
  CotypeResult value;
  long long trials = 0;
  double std_error = 0.0;  // of the expectation estimate
};

// Monte Carlo over sign patterns; an estimate, never a certificate.
inline CotypeEstimate cotype_constant_montecarlo(const UncondNorm& nm, const VectorList& xs, double q,
                                                 long long trials, Rng& rng) {
  if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("cotype: need finite q >= 1");
  const std::size_t k = detail::common_dim(xs);
  CotypeEstimate est;
  est.trials = trials;
  double s1 = 0.0, s2 = 0.0;
  std::vector<double> sum(k);
  for (long long t = 0; t < trials; ++t) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (const auto& x : xs) {
      double r = rng.bernoulli(0.5) ? 1.0 : -1.0;
      for (std::size_t c = 0; c < k; ++c) sum[c] += r * x[c];
    }
    double v = detail::powq(nm(sum), q);
    s1 += v;
    s2 += v * v;
  }
  CotypeResult& r = est.value;
  r.expectation = trials > 0 ? s1 / trials : 0.0;
  if (trials > 1) est.std_error = std::sqrt(std::max(0.0, (s2 / trials - r.expectation * r.expectation) / (trials - 1)));
  for (const auto& x : xs) r.sum_norms_q += detail::powq(nm(x), q);
  r.raw = r.expectation > 0 ? std::pow(r.sum_norms_q / r.expectation, 1.0 / q) : (r.sum_norms_q > 0 ? kInfQ : 0.0);
  r.capped = std::max(1.0, r.raw);
  return est;
}

struct RestrictedCotypeVerdict {
  Verdict verdict = Verdict::Pass;  // Pass (exact), NotFalsified (sampled) or Fail
  bool exact = true;
  long long subsets_checked = 0;
  std::vector<int> witness;  // failing subset
  double lhs = 0.0;          // E ||sum r x||^q on the witness
  double rhs = 0.0;          // C^{-q} sum ||x||^q on the witness
};

inline constexpr int kRestrictedExactMaxSize = 16;

inline RestrictedCotypeVerdict restricted_cotype_check(const UncondNorm& nm, const VectorList& family, double q,
                                                       double C, long long subset_budget, Rng& rng) {
  if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("restricted cotype: need finite q >= 1");
  if (!(C > 0.0)) throw std::invalid_argument("restricted cotype: need C > 0");
  detail::common_dim(family);
  const int m = static_cast<int>(family.size());
  std::vector<double> nq(m);
  for (int i = 0; i < m; ++i) nq[i] = detail::powq(nm(family[i]), q);
  const double cq = std::pow(C, -q);
  RestrictedCotypeVerdict v;
  std::vector<int> idx;
  auto test = [&](std::span<const int> sub) {
    ++v.subsets_checked;
    double rhs = 0.0;
    for (int i : sub) rhs += nq[i];
    rhs *= cq;
    double lhs = detail::rademacher_moment(nm, family, sub, q);
    if (lhs * (1.0 + kSumRelTol) < rhs) {
      v.verdict = Verdict::Fail;
      v.witness.assign(sub.begin(), sub.end());
      v.lhs = lhs;
      v.rhs = rhs;
      return false;
    }
    return true;
  };
  if (m <= kRestrictedExactMaxSize) {
    for (std::uint32_t s = 1; s < (1u << m); ++s) {
      idx.clear();
      for (int i = 0; i < m; ++i)
        if (s >> i & 1u) idx.push_back(i);
      if (!test(idx)) return v;
    }
    return v;
  }
  v.exact = false;
  v.verdict = Verdict::NotFalsified;
  for (long long t = 0; t < subset_budget; ++t) {
    idx.clear();
    for (int i = 0; i < m; ++i)
      if (rng.bernoulli(0.5)) idx.push_back(i);
    while (static_cast<int>(idx.size()) > kCotypeExactMaxM) idx.erase(idx.begin() + rng.below(idx.size()));
    if (idx.empty()) idx.push_back(static_cast<int>(rng.below(m)));
    if (!test(idx)) return v;
  }
  return v;
}

// Best constant for the restricted cotype inequality on this family: the
// largest cotype_constant_exact over nonempty subsets, capped at 1 from below.
inline double restricted_cotype_constant(const UncondNorm& nm, const VectorList& family, double q) {
  if (static_cast<int>(family.size()) > kRestrictedExactMaxSize)
    throw PreconditionError("restricted_cotype_constant: family larger than 16");
  const int m = static_cast<int>(family.size());
  double best = 1.0;
  VectorList sub;
  for (std::uint32_t s = 1; s < (1u << m); ++s) {
    sub.clear();
    for (int i = 0; i < m; ++i)
      if (s >> i & 1u) sub.push_back(family[i]);
    best = std::max(best, cotype_constant_exact(nm, sub, q).capped);
  }
  return best;
}

struct RestrictedFamily {
  std::vector<double> x;            // base vector, nonnegative
  std::vector<std::vector<int>> J;  // index sets J_1..J_m
  double delta = 1.0;               // overlap parameter
};

inline std::vector<double> project(std::span<const double> x, std::span<const int> J) {
  std::vector<double> out(x.size(), 0.0);
  for (int j : J) out.at(j) = x[j];
  return out;
}

struct CotypeSplitReport {
  bool projections_ok = true;  // ||P_{J_i} x|| >= 1 for all i
  bool overlap_ok = true;      // |{i : j in J_i}| <= delta m
  bool nonnegative_ok = true;
  bool cotype_verified = false;
  bool cotype_ok = true;
  std::string cotype_scope;  // which family the restricted cotype check covered
  double lhs = 0.0;          // ||x||^q
  double rhs = 0.0;          // C^{-q} delta^{-1} 2^{-(2q+5)}
  bool holds = false;
  bool preconditions_ok() const { return projections_ok && overlap_ok && nonnegative_ok && cotype_ok; }
};

// With verify_cotype, the restricted cotype hypothesis is checked exactly on
// all 2^k projections when k <= 3, else on {P_{J_i} x} when m <= verify_max_m.
inline CotypeSplitReport cotype_split_check(const UncondNorm& nm, const RestrictedFamily& fam, double q, double C,
                                 bool verify_cotype = true, int verify_max_m = 12) {
  if (!(q >= 1.0) || std::isinf(q)) throw std::invalid_argument("cotype_split_check: need finite q >= 1");
  if (!(fam.delta > 0.0)) throw std::invalid_argument("cotype_split_check: need delta > 0");
  const std::size_t k = fam.x.size();
  const std::size_t m = fam.J.size();
  CotypeSplitReport r;
  for (double xi : fam.x)
    if (xi < 0.0) r.nonnegative_ok = false;
  std::vector<int> cover(k, 0);
  VectorList proj;
  for (const auto& J : fam.J) {
    for (int j : J) {
      if (j < 0 || static_cast<std::size_t>(j) >= k) throw std::out_of_range("cotype_split_check: index out of range");
      ++cover[j];
    }
    proj.push_back(project(fam.x, J));
    if (nm(proj.back()) < 1.0) r.projections_ok = false;
  }
  for (int c : cover)
    if (c > fam.delta * static_cast<double>(m) * (1.0 + kSumRelTol)) r.overlap_ok = false;
  if (verify_cotype) {
    Rng rng(0);
    VectorList family;
    if (k <= 3) {
      for (std::uint32_t s = 1; s < (1u << k); ++s) {
        std::vector<int> J;
        for (std::size_t j = 0; j < k; ++j)
          if (s >> j & 1u) J.push_back(static_cast<int>(j));
        family.push_back(project(fam.x, J));
      }
      r.cotype_scope = "all projections P_J(x)";
    } else if (m <= static_cast<std::size_t>(std::min(verify_max_m, kRestrictedExactMaxSize))) {
      family = proj;
      r.cotype_scope = "projections P_{J_i}(x)";
    }
    if (!family.empty()) {
      r.cotype_verified = true;
      r.cotype_ok = restricted_cotype_check(nm, family, q, C, 0, rng).verdict == Verdict::Pass;
    } else {
      r.cotype_scope = "not verified (family too large)";
    }
  } else {
    r.cotype_scope = "assumed";
  }
  r.lhs = detail::powq(nm(fam.x), q);
  r.rhs = std::pow(C, -q) / fam.delta * std::pow(2.0, -(2.0 * q + 5.0));
  r.holds = r.lhs >= r.rhs;
  return r;
}

// Smallest M with ||(sum |x_i|^q)^{1/q}|| >= M^{-1} (sum ||x_i||^q)^{1/q}.
inline double q_concavity_check(const UncondNorm& nm, const VectorList& xs, double q) {
  if (std::isinf(q)) throw std::invalid_argument("q_concavity_check: q = inf is not supported");
  if (!(q >= 1.0)) throw std::invalid_argument("q_concavity_check: need q >= 1");
  const std::size_t k = detail::common_dim(xs);
  std::vector<double> acc(k, 0.0);
  double rhs = 0.0;
  for (const auto& x : xs) {
    for (std::size_t c = 0; c < k; ++c) acc[c] += detail::powq(std::fabs(x[c]), q);
    rhs += detail::powq(nm(x), q);
  }
  for (double& a : acc) a = std::pow(a, 1.0 / q);
  double lhs = nm(acc);
  rhs = std::pow(rhs, 1.0 / q);
  if (rhs == 0.0) return 1.0;
  if (lhs == 0.0) return kInfQ;
  return rhs / lhs;
}

}  // namespace gapcert
