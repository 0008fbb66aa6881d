#include <gtest/gtest.h>

#include <cmath>

#include "log_scalar.hpp"
#include "rng.hpp"

using gapcert::LogScalar;

TEST(LogScalar, ZeroInvariant) {
  auto z = LogScalar::zero();
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.sign(), 0);
  EXPECT_EQ(z.ln(), -std::numeric_limits<double>::infinity());
  EXPECT_TRUE(LogScalar::from_double(0.0).is_zero());
  EXPECT_TRUE(LogScalar::from_log(-std::numeric_limits<double>::infinity()).is_zero());
}

TEST(LogScalar, RoundTripDouble) {
  for (double x : {1.0, 0.2, -3.5, 1e-300, 6.02e23, -7e-8}) {
    auto y = LogScalar::from_double(x).to_double();
    // exp(log x) loses about |ln x| ulps
    double tol = 4 * (1 + std::fabs(std::log(std::fabs(x)))) * std::numeric_limits<double>::epsilon();
    EXPECT_NEAR(y, x, tol * std::fabs(x)) << x;
  }
}

TEST(LogScalar, MultiplyDivideExactInLogDomain) {
  gapcert::Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto a = LogScalar::from_log(1e6 * (rng.uniform() - 0.5), rng.bernoulli(0.5) ? 1 : -1);
    auto b = LogScalar::from_log(1e6 * (rng.uniform() - 0.5), rng.bernoulli(0.5) ? 1 : -1);
    auto c = (a * b) / b;
    EXPECT_EQ(c.sign(), a.sign());
    EXPECT_NEAR(c.ln(), a.ln(), 1e-9);
  }
}

TEST(LogScalar, AstronomicalMagnitudes) {
  // alpha(6) = 6^{-1e11 ln 6} is far below any double.
  auto a = LogScalar::from_log(-1e11 * std::log(6.0) * std::log(6.0));
  EXPECT_EQ(a.to_double(), 0.0);
  EXPECT_FALSE(a.is_zero());
  auto inv = LogScalar::one() / a;
  EXPECT_NEAR(inv.ln(), 1e11 * std::log(6.0) * std::log(6.0), 1e-3);
  EXPECT_LT(a, LogScalar::from_double(1e-300));
}

TEST(LogScalar, AdditionMatchesDoubles) {
  gapcert::Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    double x = (rng.uniform() - 0.5) * 100, y = (rng.uniform() - 0.5) * 100;
    auto s = LogScalar::from_double(x) + LogScalar::from_double(y);
    EXPECT_NEAR(s.to_double(), x + y, 1e-12 * (std::fabs(x) + std::fabs(y)));
    auto d = LogScalar::from_double(x) - LogScalar::from_double(y);
    EXPECT_NEAR(d.to_double(), x - y, 1e-12 * (std::fabs(x) + std::fabs(y)));
  }
}

TEST(LogScalar, AdditionCommutesAndIsMonotone) {
  auto a = LogScalar::from_double(3.0), b = LogScalar::from_double(-1.25), c = LogScalar::from_double(0.5);
  EXPECT_EQ((a + b).ln(), (b + a).ln());
  EXPECT_LT(a + b, a + c);
  EXPECT_TRUE((a - a).is_zero());
}

TEST(LogScalar, PowerAndSigns) {
  auto m = LogScalar::from_double(-2.0);
  EXPECT_NEAR(m.pow(3).to_double(), -8.0, 1e-12);
  EXPECT_NEAR(m.pow(2).to_double(), 4.0, 1e-12);
  EXPECT_THROW(m.pow(0.5), std::domain_error);
  EXPECT_THROW(LogScalar::zero().pow(-1), std::domain_error);
  EXPECT_THROW(LogScalar::one() / LogScalar::zero(), std::domain_error);
  EXPECT_THROW(LogScalar::from_log(std::nan("")), std::domain_error);
}

TEST(LogScalar, OrderingAcrossSigns) {
  auto neg_big = LogScalar::from_log(100.0, -1), neg_small = LogScalar::from_log(-100.0, -1);
  EXPECT_LT(neg_big, neg_small);
  EXPECT_LT(neg_small, LogScalar::zero());
  EXPECT_LT(LogScalar::zero(), LogScalar::from_log(-500.0));
}
