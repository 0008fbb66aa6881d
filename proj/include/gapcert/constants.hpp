#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "log_scalar.hpp"

namespace gapcert {

inline const double kLn2 = std::numbers::ln2;

inline LogScalar ls(double x) { return LogScalar::from_double(x); }

namespace detail {

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("constant parameter out of range: ") + what);
}

inline void check_q(double q) { require(q >= 2.0 && std::isfinite(q), "q >= 2"); }
inline void check_d(int d) { require(d >= 3, "d >= 3"); }
inline void check_alpha(const LogScalar& a) { require(a.sign() > 0 && a.ln() <= 0.0, "0 < alpha <= 1"); }
inline void check_eps(double e) { require(e > 0.0 && e <= 1.0, "0 < eps <= 1"); }
inline void check_L(const LogScalar& L) { require(L.sign() > 0 && L.ln() >= 0.0, "L >= 1"); }

}  // namespace detail

// Gamma = 2^115 q^10 C^2 K^3 d^25 L^8 / (alpha^14 eps^18)
inline LogScalar gamma_constant(double q, double C, double K, int d, LogScalar alpha, double eps, LogScalar L) {
  detail::check_q(q);
  detail::require(C >= 1.0, "C >= 1");
  detail::require(K >= 1.0, "K >= 1");
  detail::check_d(d);
  detail::check_alpha(alpha);
  detail::check_eps(eps);
  detail::check_L(L);
  double ln = 115 * kLn2 + 10 * std::log(q) + 2 * std::log(C) + 3 * std::log(K) + 25 * std::log(double(d)) +
              8 * L.ln() - 14 * alpha.ln() - 18 * std::log(eps);
  return LogScalar::from_log(ln);
}

// Pi = 2^113 q^10 C^2 d^24 L^8 / (alpha^14 eps^18)
inline LogScalar pi_constant(double q, double C, int d, LogScalar alpha, double eps, LogScalar L) {
  detail::check_q(q);
  detail::require(C >= 1.0, "C >= 1");
  detail::check_d(d);
  detail::check_alpha(alpha);
  detail::check_eps(eps);
  detail::check_L(L);
  double ln = 113 * kLn2 + 10 * std::log(q) + 2 * std::log(C) + 24 * std::log(double(d)) + 8 * L.ln() -
              14 * alpha.ln() - 18 * std::log(eps);
  return LogScalar::from_log(ln);
}

// Ltilde = 2 (20 d L / (alpha eps))^8
inline LogScalar ltilde_constant(int d, LogScalar L, LogScalar alpha, double eps) {
  detail::check_d(d);
  detail::check_alpha(alpha);
  detail::check_eps(eps);
  detail::check_L(L);
  return ls(2.0) * (ls(20.0 * d) * L / (alpha * ls(eps))).pow(8);
}

// c = alpha^2 / (48 d (d-1))
inline LogScalar c_constant(LogScalar alpha, int d) {
  detail::check_alpha(alpha);
  detail::check_d(d);
  return alpha.pow(2) / ls(48.0 * d * (d - 1));
}

// chat = alpha^3 / (2^15 d^3 C Ltilde^{1/q})
inline LogScalar chat_constant(LogScalar alpha, int d, double C, double q, LogScalar ltilde) {
  detail::check_alpha(alpha);
  detail::check_d(d);
  detail::check_q(q);
  detail::require(C >= 1.0, "C >= 1");
  return alpha.pow(3) / (ls(32768.0) * ls(double(d)).pow(3) * ls(C) * ltilde.pow(1.0 / q));
}

// c' = chat^2 (eps / (10 q d))^10
inline LogScalar cprime_constant(LogScalar chat, double eps, double q, int d) {
  detail::check_eps(eps);
  detail::check_q(q);
  detail::check_d(d);
  return chat.pow(2) * ls(eps / (10.0 * q * d)).pow(10);
}

// alpha(d) = d^{-10^11 ln d}
inline LogScalar alpha_nominal(int d) {
  detail::check_d(d);
  double l = std::log(double(d));
  return LogScalar::from_log(-1e11 * l * l);
}

inline double eps_nominal() { return 0.2; }

// L(d) = 24 / alpha(d)
inline LogScalar L_nominal(int d) { return ls(24.0) / alpha_nominal(d); }

// L0 = floor((7/15) 10^8) + 1, computed in integers.
inline long long L0_constant() { return 700000000LL / 15 + 1; }

// eta = 1 / (12^2 e^3 (d-1)^{2 L0 + 2})
inline LogScalar eta_constant(int d) {
  detail::check_d(d);
  double ln = -std::log(144.0) - 3.0 - (2.0 * L0_constant() + 2.0) * std::log(d - 1.0);
  return LogScalar::from_log(ln);
}

// K = (d - 2.1 sqrt(d-1))/2 * (1.5 - 1.05 sqrt(d-1)/d)^{L0 - 1}
inline LogScalar K_constant(int d) {
  detail::check_d(d);
  double s = std::sqrt(d - 1.0);
  return ls((d - 2.1 * s) / 2.0) * ls(1.5 - 1.05 * s / d).pow(static_cast<double>(L0_constant() - 1));
}

// a_i = 6/pi^2 * 1/i^2
inline double a_seq(long long i) {
  if (i < 1) throw std::invalid_argument("a_i: need i >= 1");
  double x = static_cast<double>(i);
  return 6.0 / (std::numbers::pi * std::numbers::pi) / (x * x);
}

inline void check_gap(int d, double lambda2) {
  detail::check_d(d);
  detail::require(lambda2 < d, "lambda2 < d");
}

// 2^{3616q+450} q^{384q+104} C^{129q+4} (d/(d-lambda2))^8
inline LogScalar os_bound_i(double q, double C, int d, double lambda2) {
  detail::check_q(q);
  detail::require(C >= 1.0, "C >= 1");
  check_gap(d, lambda2);
  double ln = (3616 * q + 450) * kLn2 + (384 * q + 104) * std::log(q) + (129 * q + 4) * std::log(C) +
              8 * std::log(d / (d - lambda2));
  return LogScalar::from_log(ln);
}

// q^64 2^{576q+234} (d/(d-lambda2))^8
inline LogScalar os_bound_ii(double q, int d, double lambda2) {
  detail::check_q(q);
  check_gap(d, lambda2);
  double ln = 64 * std::log(q) + (576 * q + 234) * kLn2 + 8 * std::log(d / (d - lambda2));
  return LogScalar::from_log(ln);
}

enum class ConstantTag { Gamma, Pi, Ltilde, c, chat, cprime, alpha_d, eps_d, L_d, eta, L0, K, a_i, OS_bound_i, OS_bound_ii };

struct ConstantParams {
  double q = 2.0;
  double C = 1.0;
  double K = 1.0;  // unconditionality constant
  int d = 3;
  LogScalar alpha = LogScalar::one();
  double eps = 1.0;
  LogScalar L = LogScalar::one();
  long long i = 1;
  double lambda2 = 0.0;
};

struct ConstantId {
  ConstantTag tag;
  ConstantParams p;
};

inline LogScalar eval_constant(const ConstantId& id) {
  const auto& p = id.p;
  switch (id.tag) {
    case ConstantTag::Gamma: return gamma_constant(p.q, p.C, p.K, p.d, p.alpha, p.eps, p.L);
    case ConstantTag::Pi: return pi_constant(p.q, p.C, p.d, p.alpha, p.eps, p.L);
    case ConstantTag::Ltilde: return ltilde_constant(p.d, p.L, p.alpha, p.eps);
    case ConstantTag::c: return c_constant(p.alpha, p.d);
    case ConstantTag::chat: return chat_constant(p.alpha, p.d, p.C, p.q, ltilde_constant(p.d, p.L, p.alpha, p.eps));
    case ConstantTag::cprime: {
      auto ch = chat_constant(p.alpha, p.d, p.C, p.q, ltilde_constant(p.d, p.L, p.alpha, p.eps));
      return cprime_constant(ch, p.eps, p.q, p.d);
    }
    case ConstantTag::alpha_d: return alpha_nominal(p.d);
    case ConstantTag::eps_d: return ls(eps_nominal());
    case ConstantTag::L_d: return L_nominal(p.d);
    case ConstantTag::eta: return eta_constant(p.d);
    case ConstantTag::L0: return ls(static_cast<double>(L0_constant()));
    case ConstantTag::K: return K_constant(p.d);
    case ConstantTag::a_i: return ls(a_seq(p.i));
    case ConstantTag::OS_bound_i: return os_bound_i(p.q, p.C, p.d, p.lambda2);
    case ConstantTag::OS_bound_ii: return os_bound_ii(p.q, p.d, p.lambda2);
  }
  throw std::invalid_argument("eval_constant: unknown tag");
}

inline const std::vector<std::pair<std::string, ConstantTag>>& constant_tag_names() {
  static const std::vector<std::pair<std::string, ConstantTag>> names = {
      {"Gamma", ConstantTag::Gamma}, {"Pi", ConstantTag::Pi},         {"Ltilde", ConstantTag::Ltilde},
      {"c", ConstantTag::c},         {"chat", ConstantTag::chat},     {"cprime", ConstantTag::cprime},
      {"alpha_d", ConstantTag::alpha_d}, {"eps_d", ConstantTag::eps_d}, {"L_d", ConstantTag::L_d},
      {"eta", ConstantTag::eta},     {"L0", ConstantTag::L0},         {"K", ConstantTag::K},
      {"a_i", ConstantTag::a_i},     {"OS_bound_i", ConstantTag::OS_bound_i},
      {"OS_bound_ii", ConstantTag::OS_bound_ii}};
  return names;
}

inline ConstantTag parse_constant_tag(const std::string& s) {
  for (const auto& [name, tag] : constant_tag_names())
    if (name == s) return tag;
  throw std::invalid_argument("unknown constant id '" + s + "'");
}

// Sum_{i=1}^N a_i, accumulated from the small end.
inline double a_partial_sum(long long N) {
  double s = 0.0;
  for (long long i = N; i >= 1; --i) s += a_seq(i);
  return s;
}

struct IdentityCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

inline std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ln(4/c') versus ln(Pi) at one parameter point; the two sides are built from
// different formulas (c' via chat and Ltilde, Pi directly).
struct PiIdentityPoint {
  double ln_four_over_cprime = 0.0;
  double ln_pi = 0.0;
  bool equal = false;      // |difference| <= 1e-9 (relative error of the values)
  bool dominated = false;  // 4/c' <= Pi
};

inline PiIdentityPoint pi_identity_point(double q, double C, int d, LogScalar alpha, double eps, LogScalar L) {
  auto lt = ltilde_constant(d, L, alpha, eps);
  auto cp = cprime_constant(chat_constant(alpha, d, C, q, lt), eps, q, d);
  auto lhs = ls(4.0) / cp;
  auto rhs = pi_constant(q, C, d, alpha, eps, L);
  PiIdentityPoint r;
  r.ln_four_over_cprime = lhs.ln();
  r.ln_pi = rhs.ln();
  double diff = r.ln_four_over_cprime - r.ln_pi;
  r.equal = std::fabs(diff) <= 1e-9;
  r.dominated = diff <= 1e-12 * std::max(1.0, std::fabs(r.ln_pi));
  return r;
}

inline IdentityReport identity_checks() {
  IdentityReport rep;
  {
    IdentityCheck eq{"four_over_cprime_equals_pi", true, ""};
    IdentityCheck le{"four_over_cprime_at_most_pi", true, ""};
    double worst = 0.0;
    std::string worst_at;
    struct Triple {
      LogScalar alpha;
      double eps;
      LogScalar L;
    };
    const Triple triples[] = {{ls(1.0), 1.0, ls(1.0)}, {ls(0.1), 0.2, ls(240.0)}};
    for (const auto& t : triples)
      for (double q : {2.0, 3.0, 5.0, 10.0})
        for (int d : {3, 6, 10})
          for (double C : {1.0, 20.0}) {
            auto pt = pi_identity_point(q, C, d, t.alpha, t.eps, t.L);
            double diff = pt.ln_four_over_cprime - pt.ln_pi;
            if (std::fabs(diff) > std::fabs(worst)) {
              worst = diff;
              worst_at = "q=" + fmt_double(q) + " d=" + std::to_string(d) + " C=" + fmt_double(C) +
                         " alpha=" + fmt_double(t.alpha.to_double()) + " eps=" + fmt_double(t.eps) +
                         " L=" + fmt_double(t.L.to_double());
            }
            eq.passed = eq.passed && pt.equal;
            le.passed = le.passed && pt.dominated;
          }
    eq.detail = "max |ln(4/c') - ln(Pi)| = " + fmt_double(std::fabs(worst)) + " at " + worst_at;
    le.detail = "max ln(4/c') - ln(Pi) = " + fmt_double(worst) + " at " + worst_at;
    rep.checks.push_back(eq);
    rep.checks.push_back(le);
  }
  {
    IdentityCheck k{"K_at_least_3500_for_d_ge_6", true, ""};
    for (int d = 6; d <= 64; ++d) {
      auto v = K_constant(d);
      if (!(v >= ls(3500.0))) {
        k.passed = false;
        k.detail = "fails at d=" + std::to_string(d);
      }
    }
    if (k.passed) k.detail = "checked d=6..64; ln K(6) = " + fmt_double(K_constant(6).ln());
    rep.checks.push_back(k);
  }
  {
    double s = a_partial_sum(1000000);
    IdentityCheck a{"a_partial_sum_to_1e6", s <= 1.0 && 1.0 - s <= 2e-6, "1 - sum = " + fmt_double(1.0 - s)};
    rep.checks.push_back(a);
  }
  {
    IdentityCheck g{"gamma_q_homogeneity", true, ""};
    double worst = 0.0;
    for (double q : {2.0, 3.0, 5.0, 10.0})
      for (int d : {3, 6, 10}) {
        auto a = gamma_constant(2 * q, 1.0, 1.0, d, ls(1.0), 1.0, ls(1.0));
        auto b = gamma_constant(q, 1.0, 1.0, d, ls(1.0), 1.0, ls(1.0));
        double err = std::fabs(a.ln() - b.ln() - 10 * kLn2);
        worst = std::max(worst, err);
        if (err > 1e-12 * std::max(1.0, std::fabs(a.ln()))) g.passed = false;
      }
    g.detail = "max |ln Gamma(2q) - ln Gamma(q) - 10 ln 2| = " + fmt_double(worst);
    rep.checks.push_back(g);
  }
  {
    double e = eval_constant({ConstantTag::eps_d, {}}).to_double();
    rep.checks.push_back({"eps_d_is_0.2", e == 0.2, "eps_d = " + fmt_double(e)});
  }
  {
    long long l0 = L0_constant();
    rep.checks.push_back({"L0_value", l0 == 46666667, "L0 = " + std::to_string(l0)});
  }
  return rep;
}

struct BaselineRow {
  double q = 0.0;
  double ln_gamma = 0.0;
  double ln_os_i = 0.0;
  double ln_os_ii = 0.0;
};

// ln Gamma(q) next to ln of the two older explicit bounds, over a q grid.
inline std::vector<BaselineRow> baseline_comparison(const std::vector<double>& q_grid, int d, double lambda2,
                                                    double C = 1.0, double K = 1.0, LogScalar alpha = LogScalar::one(),
                                                    double eps = 1.0, LogScalar L = LogScalar::one()) {
  std::vector<BaselineRow> rows;
  for (double q : q_grid)
    rows.push_back({q, gamma_constant(q, C, K, d, alpha, eps, L).ln(), os_bound_i(q, C, d, lambda2).ln(),
                    os_bound_ii(q, d, lambda2).ln()});
  return rows;
}

}  // namespace gapcert
