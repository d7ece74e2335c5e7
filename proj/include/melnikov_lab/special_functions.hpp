#pragma once

// Complete elliptic integrals and Jacobi elliptic functions.
//
// The modulus is carried together with its complement so that moduli very
// close to 1 (k' ~ 1e-7 and below, needed for high-order resonances near a
// separatrix) keep full relative precision in k'.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace mlab {

class EllipticModulus {
 public:
  EllipticModulus() = default;

  static EllipticModulus from_k(double k) {
    if (!(k >= 0.0 && k < 1.0))
      throw DomainError("elliptic modulus k must lie in [0, 1), got " + std::to_string(k));
    EllipticModulus m;
    m.k_ = k;
    m.kp_ = std::sqrt((1.0 - k) * (1.0 + k));
    return m;
  }

  static EllipticModulus from_kprime(double kp) {
    if (!(kp > 0.0 && kp <= 1.0))
      throw DomainError("complementary modulus k' must lie in (0, 1], got " + std::to_string(kp));
    EllipticModulus m;
    m.kp_ = kp;
    m.k_ = std::sqrt((1.0 - kp) * (1.0 + kp));
    return m;
  }

  double k() const { return k_; }
  double kprime() const { return kp_; }
  double k2() const { return k_ * k_; }
  double kprime2() const { return kp_ * kp_; }

  // the complementary modulus as a modulus in its own right, for K(k')
  EllipticModulus complement() const {
    if (k_ == 0.0) throw DomainError("complement of k = 0 is k' = 1, outside [0, 1)");
    EllipticModulus m;
    m.k_ = kp_;
    m.kp_ = k_;
    return m;
  }

 private:
  double k_ = 0.0;
  double kp_ = 1.0;
};

namespace detail {

struct AgmResult {
  double a;
  double csum;  // sum_n 2^(n-1) c_n^2, c_0 = k
};

inline AgmResult agm_sequence(const EllipticModulus& m) {
  double a = 1.0;
  double b = m.kprime();
  double csum = 0.5 * m.k2();
  double pow2 = 0.5;
  for (int i = 0; i < 64; ++i) {
    if (std::abs(a - b) < 1e-16 * a) break;
    const double c = 0.5 * (a - b);
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    pow2 *= 2.0;
    csum += pow2 * c * c;
  }
  return {a, csum};
}

}  // namespace detail

inline double ellip_K(const EllipticModulus& m) {
  return std::numbers::pi / (2.0 * detail::agm_sequence(m).a);
}

inline double ellip_E(const EllipticModulus& m) {
  const auto r = detail::agm_sequence(m);
  const double K = std::numbers::pi / (2.0 * r.a);
  return K * (1.0 - r.csum);
}

inline double ellip_K(double k) { return ellip_K(EllipticModulus::from_k(k)); }
inline double ellip_E(double k) { return ellip_E(EllipticModulus::from_k(k)); }

struct JacobiSnCnDn {
  double sn, cn, dn;
};

// Descending Landen (Gauss) transformation driven by k'^2, followed by
// backward substitution from the circular functions of the rescaled argument.
inline JacobiSnCnDn jacobi_sn_cn_dn(double u, const EllipticModulus& m) {
  double emc = m.kprime2();
  if (emc == 1.0) return {std::sin(u), std::cos(u), 1.0};

  std::array<double, 32> em{};
  std::array<double, 32> en{};
  double a = 1.0;
  double dn = 1.0;
  double c = 1.0;
  int depth = 0;
  for (int i = 0; i < 32; ++i) {
    depth = i;
    em[i] = a;
    emc = std::sqrt(emc);
    en[i] = emc;
    c = 0.5 * (a + emc);
    if (std::abs(a - emc) <= 1e-14 * a) break;
    emc *= a;
    a = c;
  }
  u *= c;
  double sn = std::sin(u);
  double cn = std::cos(u);
  if (sn != 0.0) {
    a = cn / sn;
    c *= a;
    for (int i = depth; i >= 0; --i) {
      const double b = em[i];
      a *= c;
      c *= dn;
      dn = (en[i] + a) / (b + a);
      a = c / b;
    }
    a = 1.0 / std::sqrt(c * c + 1.0);
    sn = sn >= 0.0 ? a : -a;
    cn = c * sn;
  }
  return {sn, cn, dn};
}

inline JacobiSnCnDn jacobi_sn_cn_dn(double u, double k) {
  return jacobi_sn_cn_dn(u, EllipticModulus::from_k(k));
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

inline double csch(double x) { return 1.0 / std::sinh(x); }

// arcsin(tanh t) without the domain trouble of |tanh t| -> 1
inline double gudermannian(double t) { return std::atan(std::sinh(t)); }

}  // namespace mlab
