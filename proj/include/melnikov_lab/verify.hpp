#pragma once

// Checks at eps > 0: periodic orbits continued by Newton shooting on the
// period map, and first-integral drift against the obstruction integral.

#include <cmath>
#include <string>

#include "melnikov.hpp"

namespace mlab {

struct ShootingOptions {
  double tol = 1e-9;
  int max_iters = 25;
  double integrator_tol = 1e-12;
  int samples = 256;  // for distance_to_seed
};

struct ShootingResult {
  bool converged = false;
  Trajectory orbit;  // one period of the perturbed orbit when converged
  Vec state;         // final Newton iterate, full autonomized state
  double residual = 0.0;
  int newton_iters = 0;
  double distance_to_seed = 0.0;
  bool singular_jacobian = false;  // ||(DP - I)^-1|| exceeded 1e12 at some step
  std::string diagnostic;
};

// Newton iteration on P(x) - x, P the period map of the autonomized field at
// fixed phase theta = seed(last). DP comes from the VE of the full field; the
// step is a truncated-SVD least-squares solve with halving line search.
inline ShootingResult shoot_periodic(const PerturbedField& field, const Vec& seed, double period,
                                     const ShootingOptions& opt = {}) {
  field.validate();
  if (!field.period) throw DomainError("shoot_periodic needs a time-periodic (autonomized) field");
  const double ratio = period / *field.period;
  if (!(ratio >= 0.5) || std::abs(ratio - std::round(ratio)) > 1e-9)
    throw DomainError("shoot_periodic: period must be a positive multiple of the forcing period");
  const Eigen::Index n = field.dim - 1;
  const double theta0 = seed(n);

  auto full = [&](const Vec& x) {
    Vec s(n + 1);
    s << x, theta0;
    return s;
  };
  auto residual_of = [&](const Vec& x) -> Vec {
    return integrate(field, full(x), 0.0, period, opt.integrator_tol).final().head(n) - x;
  };

  ShootingResult res;
  Vec x = seed.head(n);
  Vec r = residual_of(x);
  res.residual = r.norm();
  while (res.residual >= opt.tol && res.newton_iters < opt.max_iters) {
    const auto ve = solve_ve_full(field, full(x), 0.0, period, opt.integrator_tol);
    const Mat A = ve.final_value().topLeftCorner(n, n) - Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const double smax = sv(0), smin = sv(n - 1);
    if (!(smin > 0.0) || 1.0 / smin > 1e12) res.singular_jacobian = true;
    Vec dx = Vec::Zero(n);
    const Vec b = svd.matrixU().transpose() * (-r);
    for (Eigen::Index i = 0; i < n; ++i)
      if (sv(i) >= 1e-10 * smax && sv(i) > 0.0) dx += svd.matrixV().col(i) * (b(i) / sv(i));

    ++res.newton_iters;
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= 8; ++h, lambda *= 0.5) {
      const Vec xt = x + lambda * dx;
      const Vec rt = residual_of(xt);
      if (rt.allFinite() && rt.norm() < res.residual) {
        x = xt;
        r = rt;
        res.residual = rt.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.diagnostic = "Newton diverged: no decrease after 8 step halvings";
      break;
    }
  }
  res.state = full(x);
  res.converged = res.residual < opt.tol;
  if (!res.converged && res.diagnostic.empty())
    res.diagnostic = "Newton did not converge in " + std::to_string(opt.max_iters) + " iterations";

  // sup-norm distance between the perturbed orbit and the unperturbed orbit of the seed
  const auto pert = integrate(field, res.state, 0.0, period, opt.integrator_tol);
  const auto unpert = integrate(field.with_epsilon(0.0), seed, 0.0, period, opt.integrator_tol);
  for (int i = 0; i <= opt.samples; ++i) {
    const double t = period * i / opt.samples;
    res.distance_to_seed = std::max(res.distance_to_seed, (pert.at(t).head(n) - unpert.at(t).head(n)).norm());
  }
  if (res.converged) res.orbit = pert;
  return res;
}

struct DriftResult {
  double drift = 0.0;      // F(x(span)) - F(x0) along the eps-flow
  double predicted = 0.0;  // eps * I_{F,gamma} along the unperturbed orbit of x0
};

inline DriftResult integral_drift(const PerturbedField& field, const ScalarIntegral& F, const Vec& x0, double span,
                                  double tol = 1e-12) {
  if (!(span > 0.0)) throw DomainError("integral_drift needs a positive span");
  DriftResult d;
  const auto tr = integrate(field, x0, 0.0, span, tol);
  d.drift = F(tr.final()) - F(x0);
  d.predicted = field.epsilon * obstruction_periodic(field, F, Trajectory::single(0.0, x0), span, tol);
  return d;
}

}  // namespace mlab
