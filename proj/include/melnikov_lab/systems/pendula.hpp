#pragma once

// Two pendula coupled through a harmonic oscillator, with the oscillator in
// action-angle variables. State (x1, x2, x3, x4, I, theta):
//   H0 = -cos x1 - cos x2 + (x3^2 + x4^2)/2 + omega0 I
//   H1 = -sqrt(2I/omega0) sin(theta) (cos x1 + cos x2)

#include <cmath>
#include <numbers>

#include "../melnikov.hpp"
#include "../special_functions.hpp"

namespace mlab::pendula {

struct Config {
  double omega0 = 1.0;

  void validate() const {
    if (!(omega0 > 0.0)) throw DomainError("pendula: omega0 must be positive");
  }
};

inline PerturbedField field(const Config& cfg) {
  cfg.validate();
  const double w0 = cfg.omega0;
  PerturbedField f;
  f.dim = 6;
  f.x0_rhs = [w0](const Vec& x) {
    Vec d(6);
    d << x(2), x(3), -std::sin(x(0)), -std::sin(x(1)), 0.0, w0;
    return d;
  };
  f.jac0 = [](const Vec& x) {
    Mat J = Mat::Zero(6, 6);
    J(0, 2) = 1.0;
    J(1, 3) = 1.0;
    J(2, 0) = -std::cos(x(0));
    J(3, 1) = -std::cos(x(1));
    return J;
  };
  f.x1_rhs = [w0](const Vec& x) {
    const double I = x(4);
    if (!(I > 0.0)) throw DomainError("pendula: action I must stay positive");
    const double r = std::sqrt(2.0 * I / w0);
    const double st = std::sin(x(5)), ct = std::cos(x(5));
    const double cc = std::cos(x(0)) + std::cos(x(1));
    Vec d(6);
    d << 0.0, 0.0, -r * st * std::sin(x(0)), -r * st * std::sin(x(1)), r * ct * cc,
        -st / std::sqrt(2.0 * w0 * I) * cc;
    return d;
  };
  return f;
}

// F2 = -cos x1 + x3^2 / 2
inline ScalarIntegral F2() {
  ScalarIntegral F;
  F.value = [](const Vec& x) { return -std::cos(x(0)) + 0.5 * x(2) * x(2); };
  F.gradient = [](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g(0) = std::sin(x(0));
    g(2) = x(2);
    return g;
  };
  return F;
}

// Hamiltonian vector field of F2, a commuting field of X0
inline CommutingField F2_field() {
  CommutingField Z;
  Z.rhs = [](const Vec& x) {
    Vec d = Vec::Zero(x.size());
    d(0) = x(2);
    d(2) = -std::sin(x(0));
    return d;
  };
  Z.jac = [](const Vec& x) {
    Mat J = Mat::Zero(x.size(), x.size());
    J(0, 2) = 1.0;
    J(2, 0) = -std::cos(x(0));
    return J;
  };
  return Z;
}

// Homoclinic orbit to the periodic orbit (pi, pi, 0, 0, I, omega0 t); s1, s2
// pick the branch of each pendulum. 2 arcsin(tanh t) is written as 2 gd(t).
inline Vec homoclinic(const Config& cfg, int s1, int s2, double I, double alpha, double t) {
  Vec x(6);
  x << s1 * 2.0 * gudermannian(t), s2 * 2.0 * gudermannian(t + alpha), s1 * 2.0 * sech(t), s2 * 2.0 * sech(t + alpha), I,
      cfg.omega0 * t;
  return x;
}

inline HomoclinicFamily homoclinic_family(const Config& cfg, int s1 = 1, int s2 = 1, double spacing = 4.0) {
  return [cfg, s1, s2, spacing](double I, double alpha) {
    return OrbitGuide{[cfg, s1, s2, I, alpha](double t) { return homoclinic(cfg, s1, s2, I, alpha, t); }, spacing};
  };
}

// Published closed forms (component 1 or 2).
inline double melnikov_oracle(const Config& cfg, int component, double I, double theta0, double alpha) {
  cfg.validate();
  if (!(I > 0.0)) throw DomainError("pendula: I must be positive");
  const double w0 = cfg.omega0;
  const double pref = -std::numbers::pi * std::sqrt(8.0 * w0 * w0 * w0 * I) * csch(std::numbers::pi * w0 / 2.0);
  if (component == 2) return pref * std::cos(theta0);
  if (component == 1) return pref * (std::cos(theta0) + std::cos(theta0 - w0 * alpha));
  throw DomainError("pendula: oracle component must be 1 or 2");
}

// Component 1 as obtained by integrating the closed-form orbit directly: the
// prefactor is -2 pi sqrt(2 I omega0) csch(pi omega0 / 2), equal to the
// published one at omega0 = 1.
inline double m1_integrated(const Config& cfg, double I, double theta0, double alpha) {
  cfg.validate();
  if (!(I > 0.0)) throw DomainError("pendula: I must be positive");
  const double w0 = cfg.omega0;
  const double pref = -2.0 * std::numbers::pi * std::sqrt(2.0 * I * w0) * csch(std::numbers::pi * w0 / 2.0);
  return pref * (std::cos(theta0) + std::cos(theta0 - w0 * alpha));
}

inline double det_oracle(const Config& cfg, double I, double theta0, double alpha) {
  cfg.validate();
  const double w0 = cfg.omega0;
  const double c = csch(std::numbers::pi * w0 / 2.0);
  return -4.0 * std::numbers::pi * std::numbers::pi * w0 * w0 * I * c * c * std::sin(theta0) *
         std::sin(theta0 - w0 * alpha);
}

// Cartesian oscillator coordinates (y1, y2) with y1 = sqrt(2I/omega0) sin theta,
// y2 = sqrt(2 omega0 I) cos theta; state (x1..x4, y1, y2).
inline Vec to_cartesian(const Config& cfg, const Vec& s) {
  Vec c(6);
  c.head(4) = s.head(4);
  c(4) = std::sqrt(2.0 * s(4) / cfg.omega0) * std::sin(s(5));
  c(5) = std::sqrt(2.0 * cfg.omega0 * s(4)) * std::cos(s(5));
  return c;
}

inline Vec from_cartesian(const Config& cfg, const Vec& c) {
  const double w0 = cfg.omega0;
  Vec s(6);
  s.head(4) = c.head(4);
  s(4) = 0.5 * (w0 * c(4) * c(4) + c(5) * c(5) / w0);
  s(5) = std::atan2(std::sqrt(w0) * c(4), c(5) / std::sqrt(w0));
  return s;
}

// H = -cos x1 - cos x2 + (x3^2 + x4^2)/2 + (y2^2 + omega0^2 y1^2)/2 - eps y1 (cos x1 + cos x2)
inline PerturbedField cartesian_field(const Config& cfg) {
  cfg.validate();
  const double w0 = cfg.omega0;
  PerturbedField f;
  f.dim = 6;
  f.x0_rhs = [w0](const Vec& x) {
    Vec d(6);
    d << x(2), x(3), -std::sin(x(0)), -std::sin(x(1)), x(5), -w0 * w0 * x(4);
    return d;
  };
  f.x1_rhs = [](const Vec& x) {
    Vec d(6);
    d << 0.0, 0.0, -x(4) * std::sin(x(0)), -x(4) * std::sin(x(1)), 0.0, std::cos(x(0)) + std::cos(x(1));
    return d;
  };
  return f;
}

}  // namespace mlab::pendula
