#include <gtest/gtest.h>

#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/ellint_2.hpp>
#include <boost/math/special_functions/jacobi_elliptic.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "melnikov_lab/special_functions.hpp"

using namespace mlab;
constexpr double pi = std::numbers::pi;

namespace {

// K(k) = pi/2 sum ((2n)! / (2^2n n!^2))^2 k^2n
double K_series(double k) {
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 20000; ++n) {
    const double c = (2.0 * n - 1.0) / (2.0 * n);
    term *= c * c * k * k;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return 0.5 * pi * sum;
}

// E(k) = pi/2 (1 - sum ((2n)! / (2^2n n!^2))^2 k^2n / (2n - 1))
double E_series(double k) {
  double coef = 1.0, sum = 1.0;
  for (int n = 1; n < 20000; ++n) {
    const double c = (2.0 * n - 1.0) / (2.0 * n);
    coef *= c * c * k * k;
    const double term = coef / (2.0 * n - 1.0);
    sum -= term;
    if (term < 1e-18) break;
  }
  return 0.5 * pi * sum;
}

struct Draw {
  std::mt19937_64 rng{20240917};
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
};

}  // namespace

TEST(EllipticK, ZeroModulus) {
  EXPECT_NEAR(ellip_K(0.0), pi / 2, 1e-15);
  EXPECT_NEAR(ellip_E(0.0), pi / 2, 1e-15);
}

TEST(EllipticK, MatchesPowerSeries) {
  for (double k : {0.05, 0.2, 0.5, 0.7, 0.85, 0.9}) {
    EXPECT_NEAR(ellip_K(k), K_series(k), 1e-12 * K_series(k)) << "k = " << k;
    EXPECT_NEAR(ellip_E(k), E_series(k), 1e-12) << "k = " << k;
  }
}

TEST(EllipticK, MatchesBoost) {
  Draw d;
  for (int i = 0; i < 50; ++i) {
    const double k = d.uniform(0.0, 0.999);
    EXPECT_NEAR(ellip_K(k), boost::math::ellint_1(k), 1e-12 * boost::math::ellint_1(k));
    EXPECT_NEAR(ellip_E(k), boost::math::ellint_2(k), 1e-12);
  }
}

TEST(EllipticK, LogarithmicLimitNearSeparatrix) {
  for (double kp : {1e-5, 1e-7, 1e-10}) {
    const auto m = EllipticModulus::from_kprime(kp);
    const double L = std::log(4.0 / kp);
    const double approx = L + 0.25 * kp * kp * (L - 1.0);
    EXPECT_NEAR(ellip_K(m), approx, 1e-12 * approx) << "k' = " << kp;
    EXPECT_NEAR(ellip_E(m), 1.0, 1e-9);
  }
}

TEST(EllipticK, LegendreRelationProperty) {
  Draw d;
  for (int i = 0; i < 200; ++i) {
    const double k = d.uniform(1e-3, 1.0 - 1e-3);
    const auto m = EllipticModulus::from_k(k);
    const auto c = m.complement();
    const double lhs = ellip_E(m) * ellip_K(c) + ellip_E(c) * ellip_K(m) - ellip_K(m) * ellip_K(c);
    EXPECT_NEAR(lhs, pi / 2, 1e-12) << "k = " << k;
  }
}

TEST(EllipticK, OutOfRangeModulusThrows) {
  EXPECT_THROW(ellip_K(1.0), DomainError);
  EXPECT_THROW(ellip_K(-0.1), DomainError);
  EXPECT_THROW(EllipticModulus::from_kprime(0.0), DomainError);
}

TEST(JacobiFunctions, DegenerateModuli) {
  for (double u : {-2.0, -0.3, 0.0, 0.7, 3.1}) {
    const auto a = jacobi_sn_cn_dn(u, 0.0);
    EXPECT_NEAR(a.sn, std::sin(u), 1e-15);
    EXPECT_NEAR(a.cn, std::cos(u), 1e-15);
    EXPECT_EQ(a.dn, 1.0);
    const auto b = jacobi_sn_cn_dn(u, EllipticModulus::from_kprime(1e-9));
    EXPECT_NEAR(b.sn, std::tanh(u), 1e-12);
    EXPECT_NEAR(b.cn, 1.0 / std::cosh(u), 1e-12);
    EXPECT_NEAR(b.dn, 1.0 / std::cosh(u), 1e-12);
  }
}

TEST(JacobiFunctions, QuarterAndHalfPeriodValues) {
  for (double k : {0.1, 0.5, 0.9, 0.999}) {
    const auto m = EllipticModulus::from_k(k);
    const double K = ellip_K(m);
    const auto q = jacobi_sn_cn_dn(K, m);
    EXPECT_NEAR(q.sn, 1.0, 1e-12);
    EXPECT_NEAR(q.cn, 0.0, 1e-12);
    EXPECT_NEAR(q.dn, m.kprime(), 1e-12);
    const auto h = jacobi_sn_cn_dn(K / 2, m);
    EXPECT_NEAR(h.sn, 1.0 / std::sqrt(1.0 + m.kprime()), 1e-12);
    EXPECT_NEAR(h.dn, std::sqrt(m.kprime()), 1e-12);
  }
}

TEST(JacobiFunctions, PythagoreanIdentitiesProperty) {
  Draw d;
  for (int i = 0; i < 500; ++i) {
    const double k = d.uniform(0.0, 0.9999);
    const double u = d.uniform(-20.0, 20.0);
    const auto j = jacobi_sn_cn_dn(u, k);
    EXPECT_NEAR(j.sn * j.sn + j.cn * j.cn, 1.0, 1e-12);
    EXPECT_NEAR(j.dn * j.dn + k * k * j.sn * j.sn, 1.0, 1e-12);
  }
}

TEST(JacobiFunctions, AdditionFormulaProperty) {
  Draw d;
  for (int i = 0; i < 200; ++i) {
    const double k = d.uniform(0.0, 0.99);
    const double u = d.uniform(-5.0, 5.0), v = d.uniform(-5.0, 5.0);
    const auto a = jacobi_sn_cn_dn(u, k), b = jacobi_sn_cn_dn(v, k), s = jacobi_sn_cn_dn(u + v, k);
    const double den = 1.0 - k * k * a.sn * a.sn * b.sn * b.sn;
    EXPECT_NEAR(s.sn, (a.sn * b.cn * b.dn + b.sn * a.cn * a.dn) / den, 1e-12);
    EXPECT_NEAR(s.cn, (a.cn * b.cn - a.sn * a.dn * b.sn * b.dn) / den, 1e-12);
  }
}

TEST(JacobiFunctions, DerivativeOfSn) {
  Draw d;
  for (int i = 0; i < 100; ++i) {
    const double k = d.uniform(0.0, 0.99);
    const double u = d.uniform(-5.0, 5.0);
    const double h = 1e-5;
    const double fd = (jacobi_sn_cn_dn(u + h, k).sn - jacobi_sn_cn_dn(u - h, k).sn) / (2 * h);
    const auto j = jacobi_sn_cn_dn(u, k);
    EXPECT_NEAR(fd, j.cn * j.dn, 1e-9);
  }
}

TEST(JacobiFunctions, MatchesBoost) {
  Draw d;
  for (int i = 0; i < 200; ++i) {
    const double k = d.uniform(0.0, 0.999);
    const double u = d.uniform(-10.0, 10.0);
    double cn = 0.0, dn = 0.0;
    const double sn = boost::math::jacobi_elliptic(k, u, &cn, &dn);
    const auto j = jacobi_sn_cn_dn(u, k);
    EXPECT_NEAR(j.sn, sn, 1e-12);
    EXPECT_NEAR(j.cn, cn, 1e-12);
    EXPECT_NEAR(j.dn, dn, 1e-12);
  }
}

TEST(HyperbolicHelpers, Values) {
  EXPECT_DOUBLE_EQ(sech(0.0), 1.0);
  EXPECT_NEAR(csch(1.0), 1.0 / std::sinh(1.0), 1e-16);
  EXPECT_NEAR(gudermannian(0.0), 0.0, 1e-16);
  EXPECT_NEAR(gudermannian(40.0), pi / 2, 1e-15);
  EXPECT_NEAR(2.0 * gudermannian(0.8), 2.0 * std::asin(std::tanh(0.8)), 1e-14);
}
