#pragma once

// Free rigid body with periodic torques, autonomized with theta' = 1.
// State (w1, w2, w3, theta).

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "../melnikov.hpp"

namespace mlab::rigid_body {

using Forcing = std::function<double(double)>;

struct Config {
  std::array<double, 3> inertia{1.0, 2.0, 3.0};
  std::array<double, 4> beta{0.0, 1.0, 0.0, 0.0};  // beta0..beta3
  std::array<Forcing, 3> v{[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  double T = 2.0 * std::numbers::pi;

  void validate() const {
    for (double I : inertia)
      if (!(I > 0.0)) throw DomainError("rigidbody: moments of inertia must be positive");
    for (double b : beta)
      if (!(b >= 0.0)) throw DomainError("rigidbody: beta coefficients must be nonnegative");
    if (!(T > 0.0)) throw DomainError("rigidbody: forcing period must be positive");
    for (std::size_t j = 0; j < 3; ++j) {
      if (!v[j]) throw DomainError("rigidbody: forcing v" + std::to_string(j + 1) + " is not set");
      if (std::abs(v[j](0.0) - v[j](T)) > 1e-10)
        throw DomainError("rigidbody: forcing v" + std::to_string(j + 1) + " is not T-periodic");
    }
  }
};

inline PerturbedField field(const Config& cfg) {
  cfg.validate();
  const auto [I1, I2, I3] = cfg.inertia;
  PerturbedField f;
  f.dim = 4;
  f.x0_rhs = [I1, I2, I3](const Vec& x) {
    Vec d(4);
    d << (I2 - I3) / I1 * x(1) * x(2), (I3 - I1) / I2 * x(2) * x(0), (I1 - I2) / I3 * x(0) * x(1), 1.0;
    return d;
  };
  f.jac0 = [I1, I2, I3](const Vec& x) {
    Mat J = Mat::Zero(4, 4);
    J(0, 1) = (I2 - I3) / I1 * x(2);
    J(0, 2) = (I2 - I3) / I1 * x(1);
    J(1, 0) = (I3 - I1) / I2 * x(2);
    J(1, 2) = (I3 - I1) / I2 * x(0);
    J(2, 0) = (I1 - I2) / I3 * x(1);
    J(2, 1) = (I1 - I2) / I3 * x(0);
    return J;
  };
  f.x1_rhs = [cfg, I1, I2, I3](const Vec& x) {
    const auto& b = cfg.beta;
    const double v1 = cfg.v[0](x(3)), v2 = cfg.v[1](x(3)), v3 = cfg.v[2](x(3));
    Vec d(4);
    d << -b[0] / I1 * v3 * x(1) + b[1] / I1 * v1, b[0] / I2 * v3 * x(0) + b[2] / I2 * v2, b[3] / I3 * v3, 0.0;
    return d;
  };
  f.period = cfg.T;
  return f;
}

// p_{j+-}(c) = +-c_j e_j with c_j = sqrt(2c / I_j); order 1+, 1-, 2+, 2-, 3+, 3-
inline std::vector<Vec> equilibria(const Config& cfg, double c) {
  if (!(c > 0.0)) throw DomainError("rigidbody: energy level c must be positive");
  std::vector<Vec> out;
  for (int j = 0; j < 3; ++j)
    for (double s : {1.0, -1.0}) {
      Vec p = Vec::Zero(3);
      p(j) = s * std::sqrt(2.0 * c / cfg.inertia[static_cast<std::size_t>(j)]);
      out.push_back(p);
    }
  return out;
}

// autonomized seed state (p_{j,sign}(c), theta0), j in 1..3
inline Vec seed(const Config& cfg, int j, int sign, double c, double theta0 = 0.0) {
  if (j < 1 || j > 3 || (sign != 1 && sign != -1)) throw DomainError("rigidbody: axis must be 1..3 and sign +-1");
  const Vec p = equilibria(cfg, c)[static_cast<std::size_t>(2 * (j - 1) + (sign > 0 ? 0 : 1))];
  Vec s(4);
  s << p, theta0;
  return s;
}

// F = (I1 w1^2 + I2 w2^2 + I3 w3^2) / 2
inline ScalarIntegral energy(const Config& cfg) {
  const auto I = cfg.inertia;
  ScalarIntegral F;
  F.value = [I](const Vec& x) { return 0.5 * (I[0] * x(0) * x(0) + I[1] * x(1) * x(1) + I[2] * x(2) * x(2)); };
  F.gradient = [I](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (int j = 0; j < 3; ++j) g(j) = I[static_cast<std::size_t>(j)] * x(j);
    return g;
  };
  return F;
}

// F~ = I1^2 w1^2 + I2^2 w2^2 + I3^2 w3^2
inline ScalarIntegral momentum_squared(const Config& cfg) {
  const auto I = cfg.inertia;
  ScalarIntegral F;
  F.value = [I](const Vec& x) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += I[static_cast<std::size_t>(j)] * I[static_cast<std::size_t>(j)] * x(j) * x(j);
    return s;
  };
  F.gradient = [I](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (int j = 0; j < 3; ++j) g(j) = 2.0 * I[static_cast<std::size_t>(j)] * I[static_cast<std::size_t>(j)] * x(j);
    return g;
  };
  return F;
}

enum class Integral { energy, momentum_squared };

inline double forcing_integral(const Config& cfg, int j) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(cfg.v[static_cast<std::size_t>(j - 1)], 0.0,
                                                                       cfg.T, 15, 1e-14);
}

// +-c_j beta_j int_0^T v_j for F, +-2 c_j I_j beta_j int_0^T v_j for F~
inline double obstruction_oracle(const Config& cfg, int j, int sign, double c, Integral which = Integral::energy) {
  cfg.validate();
  if (j < 1 || j > 3 || (sign != 1 && sign != -1)) throw DomainError("rigidbody: axis must be 1..3 and sign +-1");
  if (!(c > 0.0)) throw DomainError("rigidbody: energy level c must be positive");
  const auto ju = static_cast<std::size_t>(j - 1);
  const double cj = std::sqrt(2.0 * c / cfg.inertia[ju]);
  const double factor = which == Integral::energy ? 1.0 : 2.0 * cfg.inertia[ju];
  return sign * factor * cj * cfg.beta[static_cast<std::size_t>(j)] * forcing_integral(cfg, j);
}

// Forcing presets of period T.
inline Forcing zero_mean(double T) {
  return [T](double t) { return std::sin(2.0 * std::numbers::pi * t / T); };
}
inline Forcing one_plus_sin(double T) {
  return [T](double t) { return 1.0 + std::sin(2.0 * std::numbers::pi * t / T); };
}
inline Forcing cos_squared(double T) {
  return [T](double t) {
    const double c = std::cos(2.0 * std::numbers::pi * t / T);
    return c * c;
  };
}

// Reference configuration: beta1 = 0, v2 = v3 = sin(nu t), T = 2 pi / nu.
inline Config reference(double nu = 1.0) {
  Config cfg;
  cfg.T = 2.0 * std::numbers::pi / nu;
  cfg.beta = {1.0, 0.0, 1.0, 1.0};
  cfg.v = {[](double) { return 0.0; }, [nu](double t) { return std::sin(nu * t); },
           [nu](double t) { return std::sin(nu * t); }};
  return cfg;
}

}  // namespace mlab::rigid_body
