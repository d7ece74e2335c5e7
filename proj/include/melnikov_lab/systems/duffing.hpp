#pragma once

// Periodically forced Duffing oscillator
//   x1' = x2,  x2' = a x1 - x1^3 + eps (beta cos(omega t) - delta x2)
// autonomized with theta' = 1, state (x1, x2, theta).

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "../melnikov.hpp"
#include "../special_functions.hpp"

namespace mlab::duffing {

struct Config {
  int a = 1;
  double beta = 0.0;
  double delta = 0.0;
  double omega = 1.0;

  double period() const { return 2.0 * std::numbers::pi / omega; }

  void validate() const {
    if (a != 1 && a != -1) throw DomainError("duffing: a must be +1 or -1");
    if (!(omega > 0.0)) throw DomainError("duffing: omega must be positive");
    if (!(beta >= 0.0) || !(delta >= 0.0)) throw DomainError("duffing: beta and delta must be nonnegative");
  }
};

// q_plus/q_minus: inside one lobe (a = 1); outer: around both lobes (a = 1);
// hat: the a = -1 family around the origin; hom_plus/hom_minus: homoclinic (a = 1).
enum class Family { q_plus, q_minus, outer, hat, hom_plus, hom_minus };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::q_plus: return "q+";
    case Family::q_minus: return "q-";
    case Family::outer: return "outer";
    case Family::hat: return "hat";
    case Family::hom_plus: return "hom+";
    default: return "hom-";
  }
}

inline PerturbedField field(const Config& cfg) {
  cfg.validate();
  PerturbedField f;
  f.dim = 3;
  const double a = cfg.a;
  f.x0_rhs = [a](const Vec& x) {
    Vec d(3);
    d << x(1), a * x(0) - x(0) * x(0) * x(0), 1.0;
    return d;
  };
  f.jac0 = [a](const Vec& x) {
    Mat J = Mat::Zero(3, 3);
    J(0, 1) = 1.0;
    J(1, 0) = a - 3.0 * x(0) * x(0);
    return J;
  };
  f.x1_rhs = [cfg](const Vec& x) {
    Vec d(3);
    d << 0.0, cfg.beta * std::cos(cfg.omega * x(2)) - cfg.delta * x(1), 0.0;
    return d;
  };
  f.jac1 = [cfg](const Vec& x) {
    Mat J = Mat::Zero(3, 3);
    J(1, 1) = -cfg.delta;
    J(1, 2) = -cfg.beta * cfg.omega * std::sin(cfg.omega * x(2));
    return J;
  };
  f.period = cfg.period();
  return f;
}

// H = -a x1^2/2 + x1^4/4 + x2^2/2 on the autonomized state (theta ignored)
inline ScalarIntegral hamiltonian(const Config& cfg) {
  const double a = cfg.a;
  ScalarIntegral H;
  H.value = [a](const Vec& x) { return -0.5 * a * x(0) * x(0) + 0.25 * std::pow(x(0), 4) + 0.5 * x(1) * x(1); };
  H.gradient = [a](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(0) = -a * x(0) + x(0) * x(0) * x(0);
    g(1) = x(1);
    return g;
  };
  return H;
}

namespace detail {

inline void require_family(const Config& cfg, Family f) {
  const bool needs_minus = f == Family::hat;
  if (needs_minus != (cfg.a == -1))
    throw DomainError(std::string("duffing: family ") + to_string(f) + " does not exist for a = " +
                      std::to_string(cfg.a));
}

// time scale s of the family: x(t) is built from Jacobi functions of t / s
inline double scale(Family f, const EllipticModulus& m) {
  switch (f) {
    case Family::q_plus:
    case Family::q_minus: return std::sqrt(1.0 + m.kprime2());
    case Family::outer: {
      if (!(m.k() > std::numbers::sqrt2 / 2.0)) throw DomainError("duffing outer family needs k in (1/sqrt2, 1)");
      return std::sqrt((m.k() - m.kprime()) * (m.k() + m.kprime()));
    }
    case Family::hat: {
      if (!(m.k() > 0.0 && m.k() < std::numbers::sqrt2 / 2.0))
        throw DomainError("duffing hat family needs k in (0, 1/sqrt2)");
      return std::sqrt((m.kprime() - m.k()) * (m.kprime() + m.k()));
    }
    default: throw DomainError("duffing: homoclinic orbits carry no modulus");
  }
}

inline void require_modulus(Family f, const EllipticModulus& m) {
  if ((f == Family::q_plus || f == Family::q_minus) && !(m.k() > 0.0 && m.kprime() > 0.0))
    throw DomainError("duffing q+- family needs k in (0, 1)");
  scale(f, m);
}

}  // namespace detail

// Closed-form planar orbit (x1, x2) at time t.
inline Vec orbit(const Config& cfg, Family f, const EllipticModulus& m, double t) {
  detail::require_family(cfg, f);
  Vec x(2);
  constexpr double r2 = std::numbers::sqrt2;
  if (f == Family::hom_plus || f == Family::hom_minus) {
    const double sg = f == Family::hom_plus ? 1.0 : -1.0;
    x << sg * r2 * sech(t), -sg * r2 * sech(t) * std::tanh(t);
    return x;
  }
  detail::require_modulus(f, m);
  const double s = detail::scale(f, m);
  const auto j = jacobi_sn_cn_dn(t / s, m);
  if (f == Family::q_plus || f == Family::q_minus) {
    const double sg = f == Family::q_plus ? 1.0 : -1.0;
    x << sg * r2 / s * j.dn, -sg * r2 * m.k2() / (s * s) * j.sn * j.cn;
  } else {
    x << r2 * m.k() / s * j.cn, -r2 * m.k() / (s * s) * j.sn * j.dn;
  }
  return x;
}

inline Vec orbit(const Config& cfg, Family f, double k, double t) {
  return orbit(cfg, f, f == Family::hom_plus || f == Family::hom_minus ? EllipticModulus{} : EllipticModulus::from_k(k),
               t);
}

inline std::function<Vec(double)> orbit_fn(const Config& cfg, Family f, const EllipticModulus& m) {
  return [cfg, f, m](double t) { return orbit(cfg, f, m, t); };
}

// Closed-form period of a family member.
inline double period(const Config& cfg, Family f, const EllipticModulus& m) {
  detail::require_family(cfg, f);
  detail::require_modulus(f, m);
  const double s = detail::scale(f, m);
  const double K = ellip_K(m);
  return (f == Family::q_plus || f == Family::q_minus ? 2.0 : 4.0) * K * s;
}

inline double period(const Config& cfg, Family f, double k) { return period(cfg, f, EllipticModulus::from_k(k)); }

// Modulus of the family member with l T(k) = m T, T = 2 pi / omega.
//
// Families of the a = 1 system are parameterized by log k' so that members
// close to the separatrix (k' down to 1e-150) are reachable; the a = -1 family
// by k directly.
inline EllipticModulus resonant_modulus(const Config& cfg, Family f, int m, int l) {
  cfg.validate();
  detail::require_family(cfg, f);
  if (f == Family::hom_plus || f == Family::hom_minus) throw DomainError("duffing: homoclinic orbits are not periodic");
  if (m < 1 || l < 1) throw DomainError("resonance needs positive m and l");
  const double target = m * cfg.period();

  std::function<EllipticModulus(double)> at;
  double lo, hi;
  if (f == Family::hat) {
    at = [](double u) { return EllipticModulus::from_k(u); };
    lo = 1e-12;
    hi = std::numbers::sqrt2 / 2.0 * (1.0 - 1e-13);
  } else {
    at = [](double u) { return EllipticModulus::from_kprime(std::exp(u)); };
    lo = std::log(1e-150);
    hi = f == Family::outer ? std::log(std::numbers::sqrt2 / 2.0 * (1.0 - 1e-13)) : std::log(1.0 - 1e-12);
  }
  auto g = [&](double u) { return l * period(cfg, f, at(u)) - target; };

  // the period map must be monotone for bisection to be meaningful
  constexpr int samples = 200;
  double prev = g(lo);
  int dir = 0;
  for (int i = 1; i < samples; ++i) {
    const double cur = g(lo + (hi - lo) * i / (samples - 1));
    const int d = cur > prev ? 1 : (cur < prev ? -1 : 0);
    if (d != 0) {
      if (dir != 0 && d != dir) throw DomainError("duffing: period is not monotone in the modulus");
      dir = d;
    }
    prev = cur;
  }

  double glo = g(lo), ghi = g(hi);
  if ((glo < 0.0) == (ghi < 0.0))
    throw NoResonance("duffing " + std::string(to_string(f)) + ": no member with " + std::to_string(l) +
                      " T(k) = " + std::to_string(m) + " T in the modulus range");
  for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return at(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return at(0.5 * (lo + hi));
}

// Closed-form coefficients.
inline double J1(const EllipticModulus& m, int l) {
  const double K = ellip_K(m), E = ellip_E(m);
  const double q = 1.0 + m.kprime2();
  return 4.0 * l * (q * E - 2.0 * m.kprime2() * K) / (3.0 * std::pow(q, 1.5));
}

inline double J2(const Config& cfg, const EllipticModulus& mod, int m, int l) {
  if (l != 1) return 0.0;
  const double K = ellip_K(mod), Kp = ellip_K(mod.complement());
  return std::numbers::sqrt2 * std::numbers::pi * cfg.omega * sech(m * std::numbers::pi * Kp / K);
}

inline double J1_outer(const EllipticModulus& m, int l) {
  const double K = ellip_K(m), E = ellip_E(m);
  const double q = (m.k() - m.kprime()) * (m.k() + m.kprime());
  return 8.0 * l * (q * E + m.kprime2() * K) / (3.0 * std::pow(q, 1.5));
}

inline double J2_outer(const Config& cfg, const EllipticModulus& mod, int m, int l) {
  if (l != 1 || m % 2 == 0) return 0.0;
  const double K = ellip_K(mod), Kp = ellip_K(mod.complement());
  return 2.0 * std::numbers::sqrt2 * std::numbers::pi * cfg.omega * sech(m * std::numbers::pi * Kp / (2.0 * K));
}

// the numerator keeps 2k^2 - 1 as printed; the power uses 1 - 2k^2
inline double J1_hat(const EllipticModulus& m, int l) {
  const double K = ellip_K(m), E = ellip_E(m);
  const double q = (m.k() - m.kprime()) * (m.k() + m.kprime());
  return 8.0 * l * (q * E + m.kprime2() * K) / (3.0 * std::pow(-q, 1.5));
}

inline double J2_hat(const EllipticModulus& mod, int m, int l) {
  if (l != 1 || m % 2 == 0) return 0.0;
  const double K = ellip_K(mod), Kp = ellip_K(mod.complement());
  const double q = (mod.kprime() - mod.k()) * (mod.kprime() + mod.k());
  return std::numbers::sqrt2 * std::numbers::pi * std::numbers::pi * m / (K * std::sqrt(q)) *
         sech(std::numbers::pi * m * Kp / (2.0 * K));
}

enum class OracleKind { subharmonic_plus, subharmonic_minus, subharmonic_outer, subharmonic_hat, homoclinic_plus,
                        homoclinic_minus };

// Kernel of the homoclinic forcing term: sech(pi omega / 2) is the value of
// the integral; csch(pi omega / 2) is kept to reproduce the published form.
enum class HomoclinicKernel { sech, csch };

// Closed-form Melnikov function. The forcing term carries sin(omega tau),
// which reduces to sin(tau) at omega = 1.
inline double melnikov_oracle(const Config& cfg, OracleKind kind, const EllipticModulus& mod, int m, int l, double tau,
                              HomoclinicKernel kernel = HomoclinicKernel::sech) {
  cfg.validate();
  const double s = std::sin(cfg.omega * tau);
  switch (kind) {
    case OracleKind::subharmonic_plus:
    case OracleKind::subharmonic_minus: {
      if (cfg.a != 1) throw DomainError("duffing: q+- oracles need a = 1");
      const double sg = kind == OracleKind::subharmonic_plus ? 1.0 : -1.0;
      return -cfg.delta * J1(mod, l) + sg * cfg.beta * J2(cfg, mod, m, l) * s;
    }
    case OracleKind::subharmonic_outer:
      if (cfg.a != 1) throw DomainError("duffing: outer oracle needs a = 1");
      return -cfg.delta * J1_outer(mod, l) + cfg.beta * J2_outer(cfg, mod, m, l) * s;
    case OracleKind::subharmonic_hat:
      if (cfg.a != -1) throw DomainError("duffing: hat oracle needs a = -1");
      return -cfg.delta * J1_hat(mod, l) + cfg.beta * J2_hat(mod, m, l) * s;
    default: {
      if (cfg.a != 1) throw DomainError("duffing: homoclinic oracle needs a = 1");
      const double sg = kind == OracleKind::homoclinic_plus ? 1.0 : -1.0;
      const double x = std::numbers::pi * cfg.omega / 2.0;
      const double ker = kernel == HomoclinicKernel::sech ? sech(x) : csch(x);
      return -4.0 * cfg.delta / 3.0 + sg * std::numbers::sqrt2 * std::numbers::pi * cfg.omega * cfg.beta * ker * s;
    }
  }
}

inline OracleKind oracle_kind(Family f) {
  switch (f) {
    case Family::q_plus: return OracleKind::subharmonic_plus;
    case Family::q_minus: return OracleKind::subharmonic_minus;
    case Family::outer: return OracleKind::subharmonic_outer;
    case Family::hat: return OracleKind::subharmonic_hat;
    case Family::hom_plus: return OracleKind::homoclinic_plus;
    default: return OracleKind::homoclinic_minus;
  }
}

}  // namespace mlab::duffing
