#pragma once

// Variational (VE) and adjoint variational (AVE) equations along orbits,
// periodic adjoint solutions, cotangent lifts and brackets.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "ode.hpp"

namespace mlab {

// Central-difference gradient with the same step rule as fd_jacobian.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  Vec g(x.size());
  Vec probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x(i)));
    probe(i) = x(i) + h;
    const double fp = f(probe);
    probe(i) = x(i) - h;
    const double fm = f(probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

// A first-integral candidate F with gradient dF.
struct ScalarIntegral {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;  // optional

  double operator()(const Vec& x) const { return value(x); }
  Vec grad(const Vec& x) const { return gradient ? gradient(x) : fd_gradient(value, x); }
  // dF(v) at x
  double apply(const Vec& x, const Vec& v) const { return grad(x).dot(v); }
};

struct CommutingField {
  VecMap rhs;
  JacMap jac;  // optional

  Vec operator()(const Vec& x) const { return rhs(x); }
  Mat jacobian(const Vec& x) const { return jac ? jac(x) : fd_jacobian(rhs, x); }
};

// [a, b] = Db a - Da b, i.e. [X, Z] = DZ X - DX Z.
inline Vec lie_bracket(const VecMap& a, const VecMap& b, const Vec& x, const JacMap& ja = {},
                       const JacMap& jb = {}) {
  const Mat Da = ja ? ja(x) : fd_jacobian(a, x);
  const Mat Db = jb ? jb(x) : fd_jacobian(b, x);
  return Db * a(x) - Da * b(x);
}

// {f, g} = sum_k df/dp_k dg/dx_k - dg/dp_k df/dx_k on the state y = (x, p).
inline double poisson_bracket(const std::function<double(const Vec&)>& f, const std::function<double(const Vec&)>& g,
                              const Vec& y) {
  const Eigen::Index n = y.size() / 2;
  const Vec df = fd_gradient(f, y);
  const Vec dg = fd_gradient(g, y);
  return df.tail(n).dot(dg.head(n)) - dg.tail(n).dot(df.head(n));
}

// h_X(x, p) = <p, X(x)>
inline ScalarIntegral lifted_hamiltonian(const VecMap& X, const JacMap& jac = {}) {
  ScalarIntegral h;
  h.value = [X](const Vec& y) {
    const Eigen::Index n = y.size() / 2;
    return y.tail(n).dot(X(y.head(n)));
  };
  h.gradient = [X, jac](const Vec& y) {
    const Eigen::Index n = y.size() / 2;
    const Vec x = y.head(n);
    const Mat J = jac ? jac(x) : fd_jacobian(X, x);
    Vec g(2 * n);
    g.head(n) = J.transpose() * y.tail(n);
    g.tail(n) = X(x);
    return g;
  };
  return h;
}

// Lifted field (x, p): x' = X(x), p' = -DX(x)^T p, split term by term.
inline PerturbedField cotangent_lift(const PerturbedField& field) {
  const int n = field.dim;
  PerturbedField lift;
  lift.dim = 2 * n;
  lift.period = field.period;
  lift.epsilon = field.epsilon;
  auto lifted = [n](VecMap X, JacMap J) {
    return [n, X, J](const Vec& y) {
      const Vec x = y.head(n);
      Vec out(2 * n);
      out.head(n) = X(x);
      out.tail(n) = -(J(x).transpose() * y.tail(n));
      return out;
    };
  };
  auto lifted_jac = [n](VecMap X, JacMap J) {
    return [n, X, J](const Vec& y) {
      const Vec x = y.head(n);
      const Vec p = y.tail(n);
      const Mat Jx = J(x);
      Mat out = Mat::Zero(2 * n, 2 * n);
      out.topLeftCorner(n, n) = Jx;
      out.bottomRightCorner(n, n) = -Jx.transpose();
      const VecMap adj = [J, p](const Vec& z) -> Vec { return -(J(z).transpose() * p); };
      out.bottomLeftCorner(n, n) = fd_jacobian(adj, x);
      return out;
    };
  };
  const JacMap J0 = [field](const Vec& x) { return field.jacobian0(x); };
  const JacMap J1 = [field](const Vec& x) { return field.jacobian1(x); };
  lift.x0_rhs = lifted(field.x0_rhs, J0);
  lift.x1_rhs = lifted(field.x1_rhs, J1);
  lift.jac0 = lifted_jac(field.x0_rhs, J0);
  lift.jac1 = lifted_jac(field.x1_rhs, J1);
  return lift;
}

// Fundamental matrix U(t), U(t0) = I, co-integrated with the base orbit.
class MatrixPath {
 public:
  MatrixPath(Trajectory aug, Eigen::Index n) : aug_(std::move(aug)), n_(n) {}

  Vec base(double t) const { return aug_.at(t).head(n_); }
  Mat value(double t) const { return unpack(aug_.at(t)); }
  Mat final_value() const { return unpack(aug_.final()); }
  const Trajectory& trajectory() const { return aug_; }
  double t_begin() const { return aug_.t_begin(); }
  double t_end() const { return aug_.t_end(); }

 private:
  Mat unpack(const Vec& y) const {
    const Vec tail = y.tail(n_ * n_);
    return Eigen::Map<const Mat>(tail.data(), n_, n_);
  }

  Trajectory aug_;
  Eigen::Index n_;
};

// Covector eta(t) along the base orbit, stored as the lifted state (x, eta).
class CovectorPath {
 public:
  CovectorPath() = default;
  CovectorPath(Trajectory aug, Eigen::Index n) : aug_(std::move(aug)), n_(n) {}

  Vec base(double t) const { return aug_.at(t).head(n_); }
  Vec eta(double t) const { return aug_.at(t).tail(n_); }
  Vec lifted(double t) const { return aug_.at(t); }
  const Trajectory& trajectory() const { return aug_; }
  double t_begin() const { return aug_.t_begin(); }
  double t_end() const { return aug_.t_end(); }
  Eigen::Index dim() const { return n_; }

 private:
  Trajectory aug_;
  Eigen::Index n_ = 0;
};

namespace detail {

// sign = +1: U' = J U (VE); sign = -1: U' = -J^T U (adjoint matrix equation)
inline Trajectory matrix_flow(const PerturbedField& field, const Vec& x0, const Mat& U0, double t0, double t1,
                              int sign, double tol) {
  const Eigen::Index n = x0.size();
  const Eigen::Index c = U0.cols();
  Vec y0(n + n * c);
  y0.head(n) = x0;
  y0.tail(n * c) = Eigen::Map<const Vec>(U0.data(), n * c);
  auto rhs = [&](double, const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    const Mat J = field.jacobian(x);
    const Eigen::Map<const Mat> U(y.data() + n, n, c);
    dy.resize(n + n * c);
    dy.head(n) = field.rhs(x);
    Eigen::Map<Mat> dU(dy.data() + n, n, c);
    if (sign > 0) dU = J * U;
    else dU = -(J.transpose() * U);
  };
  IntegratorOptions opt;
  opt.tol = tol;
  return integrate_rhs(rhs, y0, t0, t1, opt);
}

}  // namespace detail

// VE along an orbit of X0 (the epsilon = 0 flow), over the orbit's span.
inline MatrixPath solve_ve(const PerturbedField& field, const Trajectory& orbit, double tol) {
  const auto f0 = field.with_epsilon(0.0);
  const Eigen::Index n = field.dim;
  return MatrixPath(detail::matrix_flow(f0, orbit.front(), Mat::Identity(n, n), orbit.t_begin(), orbit.t_end(), +1, tol),
                    n);
}

// VE of the full field X0 + eps X1 from x0 over [t0, t1].
inline MatrixPath solve_ve_full(const PerturbedField& field, const Vec& x0, double t0, double t1, double tol) {
  const Eigen::Index n = field.dim;
  return MatrixPath(detail::matrix_flow(field, x0, Mat::Identity(n, n), t0, t1, +1, tol), n);
}

inline CovectorPath solve_ave(const PerturbedField& field, const Trajectory& orbit, const Vec& eta0, double tol) {
  const Eigen::Index n = field.dim;
  Vec y0(2 * n);
  y0.head(n) = orbit.front();
  y0.tail(n) = eta0;
  auto rhs = [&](double, const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    dy.resize(2 * n);
    dy.head(n) = field.x0(x);
    dy.tail(n) = -(field.jacobian0(x).transpose() * y.tail(n));
  };
  IntegratorOptions opt;
  opt.tol = tol;
  return CovectorPath(integrate_rhs(rhs, y0, orbit.t_begin(), orbit.t_end(), opt), n);
}

struct PeriodicAdjoint {
  std::vector<CovectorPath> basis;
  bool multiplicity_warning = false;  // eigenvalue-1 space has dimension > 1
  double unit_distance = 0.0;         // min |lambda - 1| over the adjoint monodromy spectrum
  Mat monodromy;                      // adjoint monodromy
};

namespace detail {

inline Vec normalize_covector(Vec v) {
  v /= v.norm();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      break;
    }
  }
  return v;
}

// difference of two states with the trailing angle wrapped when the field is time-periodic
inline Vec closure_gap(const PerturbedField& field, const Vec& a, const Vec& b) {
  Vec d = b - a;
  if (field.period) {
    const double T = *field.period;
    const Eigen::Index k = d.size() - 1;
    d(k) = std::remainder(d(k), T);
  }
  return d;
}

}  // namespace detail

// T-periodic AVE solutions: eigenvalue-1 eigenspace of the adjoint monodromy,
// each basis covector unit-normalized with its first nonzero entry positive.
inline PeriodicAdjoint periodic_adjoint(const PerturbedField& field, const Trajectory& orbit, double period,
                                        double tol) {
  const auto f0 = field.with_epsilon(0.0);
  const Eigen::Index n = field.dim;
  const double t0 = orbit.t_begin();
  const Vec x0 = orbit.front();
  const Vec xT = orbit.at(t0 + period);
  const double scale = std::max(1.0, x0.norm());
  if (detail::closure_gap(field, x0, xT).norm() >= 1e-8 * scale)
    throw DomainError("periodic_adjoint: orbit does not close over the given period");

  const Trajectory adj = detail::matrix_flow(f0, x0, Mat::Identity(n, n), t0, t0 + period, -1, tol);
  PeriodicAdjoint out;
  const Vec packed = adj.final().tail(n * n);
  out.monodromy = Eigen::Map<const Mat>(packed.data(), n, n);

  Eigen::EigenSolver<Mat> es(out.monodromy, false);
  out.unit_distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    out.unit_distance = std::min(out.unit_distance, std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0)));
  if (!(out.unit_distance < 1e-6))
    throw NoUnitEigenvalue("adjoint monodromy has no eigenvalue within 1e-6 of 1 (closest at distance " +
                           std::to_string(out.unit_distance) + ")");

  const Mat A = out.monodromy - Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const Vec s = svd.singularValues();
  const double thresh = 1e-6 * std::max(1.0, s(0));
  Eigen::Index nullity = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (s(i) < thresh) ++nullity;
  nullity = std::max<Eigen::Index>(nullity, 1);
  out.multiplicity_warning = nullity > 1;

  const Mat V = svd.matrixV();
  Mat basis = V.rightCols(nullity);
  for (Eigen::Index j = 0; j < nullity; ++j) {
    const Vec eta0 = detail::normalize_covector(basis.col(j));
    Vec y0(2 * n);
    y0.head(n) = x0;
    y0.tail(n) = eta0;
    auto rhs = [&](double, const Vec& y, Vec& dy) {
      const Vec x = y.head(n);
      dy.resize(2 * n);
      dy.head(n) = f0.x0(x);
      dy.tail(n) = -(f0.jacobian0(x).transpose() * y.tail(n));
    };
    IntegratorOptions opt;
    opt.tol = tol;
    out.basis.emplace_back(integrate_rhs(rhs, y0, t0, t0 + period, opt), n);
  }
  return out;
}

}  // namespace mlab
