#pragma once

// Three-mode truncation of a buckled beam, rescaled:
//   y1' = y4, y2' = y5, y3' = y6
//   y4' = y1 - eps S y1, y5' = -w1^2 y2 - eps b1 S y2, y6' = -w2^2 y3 - eps b2 S y3
// with S = y1^2 + b1 y2^2 + b2 y3^2.

#include <array>
#include <cmath>
#include <numbers>

#include "../melnikov.hpp"

namespace mlab::beam {

struct Config {
  double omega1 = 1.0;
  double omega2 = std::numbers::sqrt3;  // w2/w1 irrational keeps the periodic adjoint space 2-d along gamma_1
  double beta1 = 1.0;
  double beta2 = 1.0;

  void validate() const {
    if (!(omega1 > 0.0 && omega1 < omega2)) throw DomainError("beam: need 0 < omega1 < omega2");
    if (!(beta1 > 0.0) || !(beta2 > 0.0)) throw DomainError("beam: beta1 and beta2 must be positive");
  }

  double omega(int ell) const { return ell == 1 ? omega1 : omega2; }
  double beta(int ell) const { return ell == 1 ? beta1 : beta2; }
};

inline PerturbedField field(const Config& cfg) {
  cfg.validate();
  const double w1 = cfg.omega1, w2 = cfg.omega2, b1 = cfg.beta1, b2 = cfg.beta2;
  PerturbedField f;
  f.dim = 6;
  f.x0_rhs = [w1, w2](const Vec& y) {
    Vec d(6);
    d << y(3), y(4), y(5), y(0), -w1 * w1 * y(1), -w2 * w2 * y(2);
    return d;
  };
  f.jac0 = [w1, w2](const Vec&) {
    Mat J = Mat::Zero(6, 6);
    J(0, 3) = J(1, 4) = J(2, 5) = 1.0;
    J(3, 0) = 1.0;
    J(4, 1) = -w1 * w1;
    J(5, 2) = -w2 * w2;
    return J;
  };
  f.x1_rhs = [b1, b2](const Vec& y) {
    const double S = y(0) * y(0) + b1 * y(1) * y(1) + b2 * y(2) * y(2);
    Vec d(6);
    d << 0.0, 0.0, 0.0, -S * y(0), -b1 * S * y(1), -b2 * S * y(2);
    return d;
  };
  f.jac1 = [b1, b2](const Vec& y) {
    const double S = y(0) * y(0) + b1 * y(1) * y(1) + b2 * y(2) * y(2);
    const Eigen::Vector3d dS(2.0 * y(0), 2.0 * b1 * y(1), 2.0 * b2 * y(2));
    const Eigen::Vector3d c(1.0, b1, b2);
    Mat J = Mat::Zero(6, 6);
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) J(3 + r, k) = -c(r) * y(r) * dS(k);
      J(3 + r, r) -= c(r) * S;
    }
    return J;
  };
  return f;
}

// gamma_{1,c}(t) = (0, c sin w1 t, 0, 0, c w1 cos w1 t, 0); gamma_{2,c} likewise in (y3, y6)
inline Vec orbit(const Config& cfg, int ell, double c, double t) {
  if (ell != 1 && ell != 2) throw DomainError("beam: orbit index must be 1 or 2");
  const double w = cfg.omega(ell);
  Vec y = Vec::Zero(6);
  y(ell) = c * std::sin(w * t);
  y(ell + 3) = c * w * std::cos(w * t);
  return y;
}

inline double orbit_period(const Config& cfg, int ell) { return 2.0 * std::numbers::pi / cfg.omega(ell); }

// F1 = -y1^2 + y4^2, F2 = w1^2 y2^2 + y5^2, F3 = w2^2 y3^2 + y6^2
inline std::array<ScalarIntegral, 3> integrals(const Config& cfg) {
  auto quad = [](int a, int b, double ca) {
    ScalarIntegral F;
    F.value = [a, b, ca](const Vec& y) { return ca * y(a) * y(a) + y(b) * y(b); };
    F.gradient = [a, b, ca](const Vec& y) {
      Vec g = Vec::Zero(6);
      g(a) = 2.0 * ca * y(a);
      g(b) = 2.0 * y(b);
      return g;
    };
    return F;
  };
  return {quad(0, 3, -1.0), quad(1, 4, cfg.omega1 * cfg.omega1), quad(2, 5, cfg.omega2 * cfg.omega2)};
}

// Linear commuting fields Z1..Z6 of X0, each Z(y) = A y.
inline std::array<CommutingField, 6> cvfs(const Config& cfg) {
  auto linear = [](Mat A) {
    CommutingField Z;
    Z.rhs = [A](const Vec& y) { return Vec(A * y); };
    Z.jac = [A](const Vec&) { return A; };
    return Z;
  };
  const double w1s = cfg.omega1 * cfg.omega1, w2s = cfg.omega2 * cfg.omega2;
  std::array<Mat, 6> A;
  for (auto& m : A) m = Mat::Zero(6, 6);
  A[0](0, 0) = 1.0; A[0](3, 3) = 1.0;        // (y1, 0, 0, y4, 0, 0)
  A[1](0, 3) = 1.0; A[1](3, 0) = 1.0;        // (y4, 0, 0, y1, 0, 0)
  A[2](1, 1) = 1.0; A[2](4, 4) = 1.0;        // (0, y2, 0, 0, y5, 0)
  A[3](1, 4) = 1.0; A[3](4, 1) = -w1s;       // (0, y5, 0, 0, -w1^2 y2, 0)
  A[4](2, 2) = 1.0; A[4](5, 5) = 1.0;        // (0, 0, y3, 0, 0, y6)
  A[5](2, 5) = 1.0; A[5](5, 2) = -w2s;       // (0, 0, y6, 0, 0, -w2^2 y3)
  return {linear(A[0]), linear(A[1]), linear(A[2]), linear(A[3]), linear(A[4]), linear(A[5])};
}

// Periodic AVE solutions, j = 1..4:
//   (0, w1 sin w1t, 0, 0, cos w1t, 0), (0, w1 cos w1t, 0, 0, -sin w1t, 0) and the w2 analogues in (3, 6).
inline Vec adjoint_solution(const Config& cfg, int j, double t) {
  if (j < 1 || j > 4) throw DomainError("beam: adjoint index must be 1..4");
  const int ell = j <= 2 ? 1 : 2;
  const double w = cfg.omega(ell);
  Vec eta = Vec::Zero(6);
  if (j % 2 == 1) {
    eta(ell) = w * std::sin(w * t);
    eta(ell + 3) = std::cos(w * t);
  } else {
    eta(ell) = w * std::cos(w * t);
    eta(ell + 3) = -std::sin(w * t);
  }
  return eta;
}

// Published table: (3/2) pi beta^2 c^3 for (j, k, ell) = (2, 3, 1) or (4, 5, 2), else 0.
inline double J_oracle(int j, int k, int ell, double beta, double c) {
  const bool hit = (j == 2 && k == 3 && ell == 1) || (j == 4 && k == 5 && ell == 2);
  return hit ? 1.5 * std::numbers::pi * beta * beta * c * c * c : 0.0;
}

// Value obtained by integrating <eta_j, [X1, Z_k]> over one period of
// gamma_{ell,c} in closed form: -(3/2) pi beta_ell^2 c^3 / omega_ell on the
// same two cases, 0 elsewhere.
inline double J_integrated(const Config& cfg, int j, int k, int ell, double c) {
  const bool hit = (j == 2 && k == 3 && ell == 1) || (j == 4 && k == 5 && ell == 2);
  if (!hit) return 0.0;
  const double b = cfg.beta(ell);
  return -1.5 * std::numbers::pi * b * b * c * c * c / cfg.omega(ell);
}

}  // namespace mlab::beam
