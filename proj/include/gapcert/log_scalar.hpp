#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gapcert {

// Sign plus natural-log magnitude. Products, quotients and powers are a single
// floating add/multiply on the log; sums go through log-sum-exp.
class LogScalar {
 public:
  LogScalar() = default;

  static LogScalar zero() { return {}; }
  static LogScalar one() { return from_log(0.0); }

  static LogScalar from_log(double ln_abs, int sign = 1) {
    LogScalar r;
    if (sign == 0 || ln_abs == -std::numeric_limits<double>::infinity()) return r;
    if (std::isnan(ln_abs)) throw std::domain_error("LogScalar: NaN log-magnitude");
    r.sign_ = sign > 0 ? 1 : -1;
    r.ln_ = ln_abs;
    return r;
  }

  static LogScalar from_double(double x) {
    if (std::isnan(x)) throw std::domain_error("LogScalar: NaN");
    if (x == 0.0) return {};
    return from_log(std::log(std::fabs(x)), x > 0 ? 1 : -1);
  }

  int sign() const { return sign_; }
  bool is_zero() const { return sign_ == 0; }
  // ln|x|; -inf for zero.
  double ln() const { return ln_; }
  double log10() const { return ln_ / std::log(10.0); }
  double to_double() const { return sign_ == 0 ? 0.0 : sign_ * std::exp(ln_); }

  LogScalar operator-() const {
    LogScalar r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  friend LogScalar operator*(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero() || b.is_zero()) return {};
    return from_log(a.ln_ + b.ln_, a.sign_ * b.sign_);
  }

  friend LogScalar operator/(const LogScalar& a, const LogScalar& b) {
    if (b.is_zero()) throw std::domain_error("LogScalar: division by zero");
    if (a.is_zero()) return {};
    return from_log(a.ln_ - b.ln_, a.sign_ * b.sign_);
  }

  // Real exponents need a positive base; integral exponents keep the sign rule.
  LogScalar pow(double e) const {
    if (e == 0.0) return one();
    if (is_zero()) {
      if (e < 0) throw std::domain_error("LogScalar: zero to a negative power");
      return {};
    }
    int s = 1;
    if (sign_ < 0) {
      if (std::floor(e) != e) throw std::domain_error("LogScalar: negative base, fractional exponent");
      s = std::fmod(std::fabs(e), 2.0) == 1.0 ? -1 : 1;
    }
    return from_log(ln_ * e, s);
  }

  friend LogScalar operator+(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const LogScalar& hi = a.ln_ >= b.ln_ ? a : b;
    const LogScalar& lo = a.ln_ >= b.ln_ ? b : a;
    double t = std::exp(lo.ln_ - hi.ln_);
    if (hi.sign_ == lo.sign_) return from_log(hi.ln_ + std::log1p(t), hi.sign_);
    if (t == 1.0) return {};
    return from_log(hi.ln_ + std::log1p(-t), hi.sign_);
  }

  friend LogScalar operator-(const LogScalar& a, const LogScalar& b) { return a + (-b); }

  LogScalar& operator*=(const LogScalar& o) { return *this = *this * o; }
  LogScalar& operator/=(const LogScalar& o) { return *this = *this / o; }
  LogScalar& operator+=(const LogScalar& o) { return *this = *this + o; }

  // Three-way compare on the real line.
  friend int compare(const LogScalar& a, const LogScalar& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
    if (a.sign_ == 0 || a.ln_ == b.ln_) return 0;
    bool less = a.ln_ < b.ln_;
    if (a.sign_ < 0) less = !less;
    return less ? -1 : 1;
  }

  friend bool operator==(const LogScalar& a, const LogScalar& b) { return compare(a, b) == 0; }
  friend bool operator<(const LogScalar& a, const LogScalar& b) { return compare(a, b) < 0; }
  friend bool operator<=(const LogScalar& a, const LogScalar& b) { return compare(a, b) <= 0; }
  friend bool operator>(const LogScalar& a, const LogScalar& b) { return compare(a, b) > 0; }
  friend bool operator>=(const LogScalar& a, const LogScalar& b) { return compare(a, b) >= 0; }

 private:
  int sign_ = 0;
  double ln_ = -std::numeric_limits<double>::infinity();
};

inline LogScalar max(const LogScalar& a, const LogScalar& b) { return a < b ? b : a; }
inline LogScalar min(const LogScalar& a, const LogScalar& b) { return b < a ? b : a; }

}  // namespace gapcert
