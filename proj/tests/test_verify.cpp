#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "melnikov_lab/systems/duffing.hpp"
#include "melnikov_lab/systems/rigid_body.hpp"
#include "melnikov_lab/verify.hpp"

using namespace mlab;
constexpr double pi = std::numbers::pi;

namespace {

struct HatCase {
  duffing::Config cfg;
  EllipticModulus mod;
  std::function<Vec(double)> q;
  double scale = 0.0;

  explicit HatCase(double beta) {
    cfg.a = -1;
    cfg.beta = beta;
    cfg.delta = 0.1;
    cfg.omega = 2.0;
    mod = duffing::resonant_modulus(cfg, duffing::Family::hat, 1, 1);
    q = duffing::orbit_fn(cfg, duffing::Family::hat, mod);
    for (int i = 0; i < 256; ++i) scale = std::max(scale, q(cfg.period() * i / 256).norm());
  }

  // phase-0 state of the unperturbed orbit shifted by tau0
  Vec seed(double tau0) const {
    Vec s(3);
    s << q(-tau0), 0.0;
    return s;
  }

  MelnikovCurve curve(int n) const {
    std::vector<double> taus;
    for (int i = 0; i < n; ++i) taus.push_back(cfg.period() * i / n);
    return subharmonic_melnikov(duffing::field(cfg), duffing::hamiltonian(cfg), q,
                                duffing::period(cfg, duffing::Family::hat, mod), 1, 1, taus);
  }
};

}  // namespace

TEST(Shooting, UnperturbedOrbitIsAlreadyPeriodic) {
  const HatCase h(1.0);
  const auto r = shoot_periodic(duffing::field(h.cfg), h.seed(0.4), h.cfg.period());
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.newton_iters, 0);
  EXPECT_LT(r.distance_to_seed, 1e-9);
  EXPECT_NEAR(r.orbit.t_end(), h.cfg.period(), 1e-15);
}

TEST(Shooting, SimpleZerosPersistNearTheirSeeds) {
  const HatCase h(1.0);
  const double eps = 1e-3;
  const auto rep = find_zeros(h.curve(64));
  ASSERT_EQ(rep.zeros.size(), 2u);
  for (const auto& z : rep.zeros) {
    ASSERT_EQ(z.classification, ZeroClass::simple);
    const auto r = shoot_periodic(duffing::field(h.cfg).with_epsilon(eps), h.seed(z.parameter), h.cfg.period());
    EXPECT_TRUE(r.converged) << r.diagnostic;
    EXPECT_LT(r.residual, 1e-9);
    EXPECT_LT(r.distance_to_seed, 10.0 * eps * h.scale) << z.parameter;
    EXPECT_FALSE(r.singular_jacobian);
    // the orbit closes under the perturbed flow
    const auto back = integrate(duffing::field(h.cfg).with_epsilon(eps), r.state, 0.0, h.cfg.period(), 1e-12);
    EXPECT_LT((back.final().head(2) - r.state.head(2)).norm(), 1e-8);
  }
}

TEST(Shooting, DistanceShrinksWithEpsilon) {
  const HatCase h(1.0);
  const auto rep = find_zeros(h.curve(64));
  ASSERT_FALSE(rep.zeros.empty());
  const Vec seed = h.seed(rep.zeros.front().parameter);
  const auto a = shoot_periodic(duffing::field(h.cfg).with_epsilon(1e-3), seed, h.cfg.period());
  const auto b = shoot_periodic(duffing::field(h.cfg).with_epsilon(1e-4), seed, h.cfg.period());
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(std::log10(a.distance_to_seed / b.distance_to_seed), 1.0, 0.15);
}

TEST(Shooting, NoConvergenceNearSeedsWithoutZerosOn16Seeds) {
  // forcing too weak to balance the damping: the curve has no zeros
  const HatCase h(0.02);
  const double eps = 1e-3;
  const auto c = h.curve(32);
  EXPECT_TRUE(find_zeros(c).none_on_grid());
  int nearby = 0;
  for (int i = 0; i < 16; ++i) {
    const double tau0 = h.cfg.period() * i / 16;
    const auto r = shoot_periodic(duffing::field(h.cfg).with_epsilon(eps), h.seed(tau0), h.cfg.period());
    if (r.converged && r.distance_to_seed < 10.0 * eps * h.scale) ++nearby;
    if (!r.converged) EXPECT_FALSE(r.diagnostic.empty());
  }
  EXPECT_EQ(nearby, 0);
}

TEST(Shooting, InputValidation) {
  const HatCase h(1.0);
  const auto f = duffing::field(h.cfg);
  EXPECT_THROW(shoot_periodic(f, h.seed(0.0), 0.7 * h.cfg.period()), DomainError);
  PerturbedField autonomous = f;
  autonomous.period.reset();
  EXPECT_THROW(shoot_periodic(autonomous, h.seed(0.0), 1.0), DomainError);
}

TEST(Shooting, IterationCapIsReported) {
  const HatCase h(1.0);
  ShootingOptions opt;
  opt.max_iters = 1;
  opt.tol = 1e-14;
  const auto r = shoot_periodic(duffing::field(h.cfg).with_epsilon(1e-3), h.seed(0.2), h.cfg.period(), opt);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.newton_iters, 1);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Drift, RigidBodyEnergyDriftIsLinearInEpsilon) {
  auto cfg = rigid_body::reference();
  cfg.beta = {0.0, 1.0, 0.0, 0.0};
  cfg.v = {rigid_body::one_plus_sin(cfg.T), [](double) { return 0.0; }, [](double) { return 0.0; }};
  const auto F = rigid_body::energy(cfg);
  const Vec x0 = rigid_body::seed(cfg, 1, 1, 1.0);
  const std::vector<double> eps{1e-3, 1e-4, 1e-5};
  std::vector<double> lx, ly;
  for (double e : eps) {
    const auto d = integral_drift(rigid_body::field(cfg).with_epsilon(e), F, x0, cfg.T);
    EXPECT_NEAR(d.predicted, e * rigid_body::obstruction_oracle(cfg, 1, 1, 1.0), 1e-12);
    lx.push_back(std::log(e));
    ly.push_back(std::log(std::abs(d.drift)));
  }
  const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
  EXPECT_NEAR(slope, 1.0, 0.1);
  const auto small = integral_drift(rigid_body::field(cfg).with_epsilon(1e-5), F, x0, cfg.T);
  EXPECT_NEAR(small.drift / small.predicted, 1.0, 1e-3);
}

TEST(Drift, ZeroMeanForcingGivesSecondOrderDrift) {
  auto cfg = rigid_body::reference();
  cfg.beta = {0.0, 1.0, 0.0, 0.0};
  cfg.v = {rigid_body::zero_mean(cfg.T), [](double) { return 0.0; }, [](double) { return 0.0; }};
  const auto F = rigid_body::energy(cfg);
  const Vec x0 = rigid_body::seed(cfg, 1, 1, 1.0);
  const auto d = integral_drift(rigid_body::field(cfg).with_epsilon(1e-3), F, x0, cfg.T);
  EXPECT_LT(std::abs(d.predicted), 1e-12);
  EXPECT_LT(std::abs(d.drift), 1e-5);
  EXPECT_THROW(integral_drift(rigid_body::field(cfg), F, x0, 0.0), DomainError);
}
