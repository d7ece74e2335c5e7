#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "melnikov_lab/systems/beam.hpp"
#include "melnikov_lab/systems/duffing.hpp"
#include "melnikov_lab/systems/rigid_body.hpp"
#include "melnikov_lab/variational.hpp"

using namespace mlab;

namespace {

struct Draw {
  std::mt19937_64 rng{7741};
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  Vec vec(Eigen::Index n, double r = 1.0) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(-r, r);
    return v;
  }
  Mat mat(Eigen::Index n) {
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform(-1.0, 1.0);
    return m;
  }
};

// quadratic field x -> A x + (x.x) b
VecMap quadratic(const Mat& A, const Vec& b) {
  return [A, b](const Vec& x) { return Vec(A * x + x.squaredNorm() * b); };
}

// distance from v to the column span of B
double off_span(const Mat& B, const Vec& v) {
  const Vec proj = B * B.colPivHouseholderQr().solve(v);
  return (v - proj).norm();
}

Mat adjoint_basis_at(const PeriodicAdjoint& pa, double t) {
  Mat B(pa.basis.front().dim(), static_cast<Eigen::Index>(pa.basis.size()));
  for (std::size_t j = 0; j < pa.basis.size(); ++j) B.col(static_cast<Eigen::Index>(j)) = pa.basis[j].eta(t);
  return B;
}

Vec duffing_state(const duffing::Config& cfg, duffing::Family f, const EllipticModulus& m) {
  Vec x(3);
  x << duffing::orbit(cfg, f, m, 0.0), 0.0;
  return x;
}

}  // namespace

TEST(LieBracket, LinearFieldsGiveCommutator) {
  Draw d;
  for (int i = 0; i < 20; ++i) {
    const Mat A = d.mat(3), B = d.mat(3);
    const Vec x = d.vec(3);
    const VecMap a = [A](const Vec& y) { return Vec(A * y); };
    const VecMap b = [B](const Vec& y) { return Vec(B * y); };
    EXPECT_LT((lie_bracket(a, b, x) - (B * A - A * B) * x).norm(), 1e-7);
  }
}

TEST(LieBracket, AntisymmetryAndJacobiProperty) {
  Draw d;
  for (int i = 0; i < 20; ++i) {
    const VecMap a = quadratic(d.mat(3), d.vec(3)), b = quadratic(d.mat(3), d.vec(3)),
                 c = quadratic(d.mat(3), d.vec(3));
    const Vec x = d.vec(3);
    EXPECT_LT((lie_bracket(a, b, x) + lie_bracket(b, a, x)).norm(), 1e-8);
    const VecMap ab = [a, b](const Vec& y) { return lie_bracket(a, b, y); };
    const VecMap bc = [b, c](const Vec& y) { return lie_bracket(b, c, y); };
    const VecMap ca = [c, a](const Vec& y) { return lie_bracket(c, a, y); };
    const Vec jac = lie_bracket(ab, c, x) + lie_bracket(bc, a, x) + lie_bracket(ca, b, x);
    EXPECT_LT(jac.norm(), 1e-4);
  }
}

TEST(LieBracket, BeamSymmetriesCommuteWithUnperturbedField) {
  const beam::Config cfg;
  const auto f = beam::field(cfg);
  Draw d;
  for (const auto& Z : beam::cvfs(cfg)) {
    const Vec y = d.vec(6);
    EXPECT_LT(lie_bracket(f.x0_rhs, Z.rhs, y, f.jac0, Z.jac).norm(), 1e-12);
  }
}

TEST(PoissonBracket, LiftedHamiltoniansFollowTheLieBracket) {
  // {h_X, h_Z} = h_[X,Z] for h_X(x, p) = <p, X(x)>
  Draw d;
  for (int i = 0; i < 20; ++i) {
    const VecMap X = quadratic(d.mat(3), d.vec(3)), Z = quadratic(d.mat(3), d.vec(3));
    const Vec y = d.vec(6);
    const auto hX = lifted_hamiltonian(X), hZ = lifted_hamiltonian(Z);
    const double lhs = poisson_bracket(hX.value, hZ.value, y);
    const double rhs = y.tail(3).dot(lie_bracket(X, Z, y.head(3)));
    EXPECT_NEAR(lhs, rhs, 1e-6);
  }
}

TEST(PoissonBracket, CanonicalPairs) {
  Draw d;
  const Vec y = d.vec(4);
  auto coord = [](int i) { return [i](const Vec& v) { return v(i); }; };
  EXPECT_NEAR(poisson_bracket(coord(2), coord(0), y), 1.0, 1e-9);  // {p1, x1}
  EXPECT_NEAR(poisson_bracket(coord(0), coord(2), y), -1.0, 1e-9);
  EXPECT_NEAR(poisson_bracket(coord(0), coord(1), y), 0.0, 1e-9);
}

TEST(LiftedHamiltonian, GradientMatchesFiniteDifferences) {
  Draw d;
  const VecMap X = quadratic(d.mat(3), d.vec(3));
  const auto h = lifted_hamiltonian(X);
  const Vec y = d.vec(6);
  EXPECT_LT((h.gradient(y) - fd_gradient(h.value, y)).norm(), 1e-7);
}

TEST(CotangentLift, CommutingFieldGivesConservedHamiltonian) {
  const beam::Config cfg;
  const auto lift = cotangent_lift(beam::field(cfg));
  Draw d;
  for (const auto& Z : beam::cvfs(cfg)) {
    const auto hZ = lifted_hamiltonian(Z.rhs, Z.jac);
    Vec y0 = d.vec(12, 0.5);
    const auto tr = integrate(lift, y0, 0.0, 3.0, 1e-12);
    EXPECT_NEAR(hZ(tr.final()), hZ(y0), 1e-8 * std::max(1.0, std::abs(hZ(y0))));
  }
}

TEST(CotangentLift, LiftedJacobianMatchesFiniteDifferences) {
  duffing::Config cfg;
  cfg.beta = 0.3;
  cfg.delta = 0.2;
  const auto lift = cotangent_lift(duffing::field(cfg));
  Draw d;
  const Vec y = d.vec(6);
  EXPECT_LT((lift.jac0(y) - fd_jacobian(lift.x0_rhs, y)).norm(), 1e-6);
  EXPECT_LT((lift.jac1(y) - fd_jacobian(lift.x1_rhs, y)).norm(), 1e-6);
}

TEST(VariationalEquations, PairingIsConservedProperty) {
  duffing::Config cfg;
  const auto f = duffing::field(cfg);
  Draw d;
  for (int i = 0; i < 8; ++i) {
    Vec x0(3);
    x0 << d.uniform(-1.2, 1.2), d.uniform(-0.8, 0.8), d.uniform(0.0, 6.0);
    const auto orbit = integrate(f, x0, 0.0, 5.0, 1e-12);
    const auto U = solve_ve(f, orbit, 1e-12);
    const Vec eta0 = d.vec(3), v = d.vec(3);
    const auto eta = solve_ave(f, orbit, eta0, 1e-12);
    for (double t : {1.0, 2.5, 5.0}) EXPECT_NEAR(eta.eta(t).dot(U.value(t) * v), eta0.dot(v), 1e-8) << t;
  }
}

TEST(VariationalEquations, MatchesFiniteDifferenceOfTheFlow) {
  duffing::Config cfg;
  cfg.beta = 0.5;
  cfg.delta = 0.1;
  const auto f = duffing::field(cfg).with_epsilon(0.2);
  Vec x0(3);
  x0 << 0.4, -0.2, 0.3;
  const auto U = solve_ve_full(f, x0, 0.0, 4.0, 1e-12);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Vec xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    const Vec col = (integrate(f, xp, 0.0, 4.0, 1e-12).final() - integrate(f, xm, 0.0, 4.0, 1e-12).final()) / (2 * h);
    EXPECT_LT((U.final_value().col(j) - col).norm(), 1e-5) << j;
  }
}

TEST(PeriodicAdjoint, DuffingLobeOrbitCarriesDHAndDTheta) {
  duffing::Config cfg;
  const auto mod = duffing::resonant_modulus(cfg, duffing::Family::q_plus, 1, 1);
  const auto f = duffing::field(cfg);
  const double T = cfg.period();
  const auto orbit = integrate(f, duffing_state(cfg, duffing::Family::q_plus, mod), 0.0, T, 1e-13);
  const auto pa = periodic_adjoint(f, orbit, T, 1e-12);
  EXPECT_LT(pa.unit_distance, 1e-6);
  ASSERT_EQ(pa.basis.size(), 2u);
  EXPECT_TRUE(pa.multiplicity_warning);
  const auto H = duffing::hamiltonian(cfg);
  for (double t : {0.0, 1.3, 4.0}) {
    const Mat B = adjoint_basis_at(pa, t);
    const Vec dH = H.grad(orbit.at(t));
    EXPECT_LT(off_span(B, dH / dH.norm()), 1e-6) << t;
    EXPECT_LT(off_span(B, Vec::Unit(3, 2)), 1e-6) << t;
  }
  // basis normalization: unit length, first nonzero entry positive
  for (const auto& b : pa.basis) {
    const Vec e = b.eta(0.0);
    EXPECT_NEAR(e.norm(), 1.0, 1e-12);
    for (Eigen::Index i = 0; i < e.size(); ++i)
      if (std::abs(e(i)) > 1e-12) {
        EXPECT_GT(e(i), 0.0);
        break;
      }
  }
}

TEST(PeriodicAdjoint, DuffingHatOrbit) {
  duffing::Config cfg;
  cfg.a = -1;
  cfg.omega = 2.0;
  const auto mod = duffing::resonant_modulus(cfg, duffing::Family::hat, 1, 1);
  const auto f = duffing::field(cfg);
  const double T = cfg.period();
  const auto orbit = integrate(f, duffing_state(cfg, duffing::Family::hat, mod), 0.0, T, 1e-13);
  const auto pa = periodic_adjoint(f, orbit, T, 1e-12);
  ASSERT_EQ(pa.basis.size(), 2u);
  const Vec dH = duffing::hamiltonian(cfg).grad(orbit.at(0.7));
  EXPECT_LT(off_span(adjoint_basis_at(pa, 0.7), dH / dH.norm()), 1e-6);
}

TEST(PeriodicAdjoint, BeamModeOrbitMatchesClosedForm) {
  const beam::Config cfg;
  const auto f = beam::field(cfg);
  const double T = beam::orbit_period(cfg, 1);
  const auto orbit = integrate(f, beam::orbit(cfg, 1, 0.7, 0.0), 0.0, T, 1e-13);
  const auto pa = periodic_adjoint(f, orbit, T, 1e-12);
  ASSERT_EQ(pa.basis.size(), 2u);
  for (double t : {0.0, 1.1, 3.0, 5.5}) {
    const Mat B = adjoint_basis_at(pa, t);
    for (int j = 1; j <= 2; ++j) {
      const Vec eta = beam::adjoint_solution(cfg, j, t);
      EXPECT_LT(off_span(B, eta / eta.norm()), 1e-8) << "j = " << j << " t = " << t;
    }
  }
}

TEST(PeriodicAdjoint, RigidBodyMiddleAxisEquilibrium) {
  const auto cfg = rigid_body::reference();
  const auto f = rigid_body::field(cfg);
  const auto orbit = integrate(f, rigid_body::seed(cfg, 2, 1, 0.5), 0.0, cfg.T, 1e-13);
  const auto pa = periodic_adjoint(f, orbit, cfg.T, 1e-12);
  ASSERT_EQ(pa.basis.size(), 2u);
  const Mat B = adjoint_basis_at(pa, 2.0);
  EXPECT_LT(off_span(B, Vec::Unit(4, 1)), 1e-8);
  EXPECT_LT(off_span(B, Vec::Unit(4, 3)), 1e-8);
}

TEST(PeriodicAdjoint, RejectsOrbitThatDoesNotClose) {
  const beam::Config cfg;
  const auto f = beam::field(cfg);
  const double T = beam::orbit_period(cfg, 1);
  const auto orbit = integrate(f, beam::orbit(cfg, 1, 0.7, 0.0), 0.0, 1.5 * T, 1e-12);
  EXPECT_THROW(periodic_adjoint(f, orbit, 0.5 * T, 1e-12), DomainError);
}
