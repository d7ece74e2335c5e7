#pragma once

// Dormand-Prince 5(4) integration with dense output, a fixed-step RK4
// cross-check mode, Poincare-section event refinement and quadrature along
// trajectories by accumulator augmentation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecMap = std::function<Vec(const Vec&)>;
using JacMap = std::function<Mat(const Vec&)>;

// Central differences, h_i = max(1e-6, 1e-6 |x_i|).
inline Mat fd_jacobian(const VecMap& f, const Vec& x) {
  Vec probe = x;
  Mat J;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x(i)));
    probe(i) = x(i) + h;
    const Vec fp = f(probe);
    probe(i) = x(i) - h;
    const Vec fm = f(probe);
    probe(i) = x(i);
    if (i == 0) J.resize(fp.size(), x.size());
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

// X_eps = X0 + eps X1. For time-periodic systems the angle theta is carried as
// the last state component with theta' = 1 (or D_I H^0 in action-angle form).
struct PerturbedField {
  int dim = 0;
  VecMap x0_rhs;
  VecMap x1_rhs;
  JacMap jac0;  // optional, finite differences when empty
  JacMap jac1;  // optional
  std::optional<double> period;
  double epsilon = 0.0;

  Vec x0(const Vec& x) const { return x0_rhs(x); }
  Vec x1(const Vec& x) const { return x1_rhs(x); }

  Vec rhs(const Vec& x) const {
    Vec f = x0_rhs(x);
    if (epsilon != 0.0) f += epsilon * x1_rhs(x);
    return f;
  }

  Mat jacobian0(const Vec& x) const { return jac0 ? jac0(x) : fd_jacobian(x0_rhs, x); }
  Mat jacobian1(const Vec& x) const { return jac1 ? jac1(x) : fd_jacobian(x1_rhs, x); }

  Mat jacobian(const Vec& x) const {
    Mat J = jacobian0(x);
    if (epsilon != 0.0) J += epsilon * jacobian1(x);
    return J;
  }

  PerturbedField with_epsilon(double eps) const {
    PerturbedField f = *this;
    f.epsilon = eps;
    return f;
  }

  void validate() const {
    if (dim <= 0) throw DomainError("field dimension must be positive");
    if (!x0_rhs || !x1_rhs) throw DomainError("field needs both X0 and X1");
    if (period && !(*period > 0.0)) throw DomainError("period must be strictly positive");
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be >= 0");
  }
};

enum class Scheme { dopri5, rk4 };

struct IntegratorOptions {
  double tol = 1e-10;
  Scheme scheme = Scheme::dopri5;
  double rk4_step = 0.0;  // 0 picks h ~ 0.5 tol^(1/4)
  std::size_t max_steps = 20'000'000;
};

struct Event {
  double time;
  Vec state;
  double slope;  // d(level)/dt at the crossing
};

class Trajectory {
 public:
  Trajectory() = default;

  static Trajectory single(double t, const Vec& x) {
    Trajectory tr;
    tr.times_.push_back(t);
    tr.states_.push_back(x);
    return tr;
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& states() const { return states_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  Eigen::Index dim() const { return states_.empty() ? 0 : states_.front().size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const Vec& front() const { return states_.front(); }
  const Vec& back() const { return states_.back(); }

  // state at the time the integration started from (t0 of integrate)
  const Vec& initial() const { return backward_ ? states_.back() : states_.front(); }
  const Vec& final() const { return backward_ ? states_.front() : states_.back(); }

  std::vector<Event>& events() { return events_; }
  const std::vector<Event>& events() const { return events_; }

  // Dense output. Outside the span the nearest step polynomial is extrapolated.
  Vec at(double t) const {
    if (times_.size() == 1) return states_.front();
    const std::size_t i = segment_index(t);
    if (t == times_[i]) return states_[i];
    if (t == times_[i + 1]) return states_[i + 1];
    return segments_[i].eval(t);
  }

  // index of the step containing t, clamped to the span
  std::size_t segment_index(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    return std::min(i, times_.size() - 2);
  }

  // Concatenate pieces ordered in time whose spans abut. A shared node keeps
  // the state of the earlier piece.
  static Trajectory join(const std::vector<Trajectory>& pieces) {
    Trajectory out;
    for (const auto& p : pieces) {
      if (p.empty()) continue;
      std::size_t first = 0;
      if (!out.empty()) {
        if (p.t_begin() < out.t_end()) throw DomainError("Trajectory::join: pieces overlap");
        if (p.t_begin() == out.t_end()) first = 1;
        else out.segments_.push_back(Segment::linear(out.t_end(), out.states_.back(), p.t_begin(), p.front()));
      }
      for (std::size_t i = first; i < p.size(); ++i) {
        out.times_.push_back(p.times_[i]);
        out.states_.push_back(p.states_[i]);
      }
      out.segments_.insert(out.segments_.end(), p.segments_.begin(), p.segments_.end());
      out.events_.insert(out.events_.end(), p.events_.begin(), p.events_.end());
    }
    return out;
  }

  // the span is covered in reverse by a backward integration; used by the integrator
  struct Segment {
    double origin = 0.0;
    double h = 1.0;
    Vec r1, r2, r3, r4, r5;

    Vec eval(double t) const {
      const double th = (t - origin) / h;
      const double th1 = 1.0 - th;
      if (r5.size() == 0) return r1 + th * (r2 + th1 * (r3 + th * r4));
      return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }

    static Segment linear(double t0, const Vec& y0, double t1, const Vec& y1) {
      Segment s;
      s.origin = t0;
      s.h = t1 - t0;
      s.r1 = y0;
      s.r2 = y1 - y0;
      s.r3 = Vec::Zero(y0.size());
      s.r4 = Vec::Zero(y0.size());
      return s;
    }
  };

  void push_start(double t, const Vec& x) {
    times_.push_back(t);
    states_.push_back(x);
  }

  void push_step(double t, const Vec& x, Segment seg) {
    times_.push_back(t);
    states_.push_back(x);
    segments_.push_back(std::move(seg));
  }

  void finish(bool backward) {
    backward_ = backward;
    if (backward) {
      std::reverse(times_.begin(), times_.end());
      std::reverse(states_.begin(), states_.end());
      std::reverse(segments_.begin(), segments_.end());
    }
  }

 private:
  std::vector<double> times_;
  std::vector<Vec> states_;
  std::vector<Segment> segments_;
  std::vector<Event> events_;
  bool backward_ = false;
};

namespace detail {

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Vec& v, double t) {
  if (!all_finite(v)) throw NonFinite("right-hand side returned a non-finite value at t = " + std::to_string(t));
}

// Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner)
struct DP {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double tol) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = tol + tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(err.size()));
}

template <class Rhs>
double initial_step(Rhs& f, double t, const Vec& y, const Vec& f0, double dir, double hmax, double tol) {
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sk = tol + tol * std::abs(y(i));
    dnf += (f0(i) / sk) * (f0(i) / sk);
    dny += (y(i) / sk) * (y(i) / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  Vec y1 = y + dir * h * f0;
  Vec f1(y.size());
  f(t + dir * h, y1, f1);
  require_finite(f1, t + dir * h);
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sk = tol + tol * std::abs(y(i));
    der2 += ((f1(i) - f0(i)) / sk) * ((f1(i) - f0(i)) / sk);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

template <class Rhs>
Trajectory dopri5(Rhs& f, const Vec& x0, double t0, double t1, const IntegratorOptions& opt) {
  using C = DP;
  const Eigen::Index n = x0.size();
  const double span = std::abs(t1 - t0);
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double hmin = 1e-14 * span;
  const double tol = opt.tol;

  Trajectory tr;
  tr.push_start(t0, x0);

  Vec y = x0, y1(n), ys(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), err(n);
  double t = t0;
  f(t, y, k1);
  require_finite(k1, t);
  double h = dir * initial_step(f, t, y, k1, dir, span, tol);
  double facold = 1e-4;
  bool reject = false;
  bool last = false;
  std::size_t steps = 0;

  while (true) {
    if (++steps > opt.max_steps) throw StepFailure("step budget exhausted before reaching t1");
    if (std::abs(h) < hmin) throw StepFailure("step size underflow below h_min at t = " + std::to_string(t));
    if ((t + 1.01 * h - t1) * dir >= 0.0) {
      h = t1 - t;
      last = true;
    }

    ys = y + h * C::a21 * k1;
    f(t + C::c2 * h, ys, k2);
    ys = y + h * (C::a31 * k1 + C::a32 * k2);
    f(t + C::c3 * h, ys, k3);
    ys = y + h * (C::a41 * k1 + C::a42 * k2 + C::a43 * k3);
    f(t + C::c4 * h, ys, k4);
    ys = y + h * (C::a51 * k1 + C::a52 * k2 + C::a53 * k3 + C::a54 * k4);
    f(t + C::c5 * h, ys, k5);
    ys = y + h * (C::a61 * k1 + C::a62 * k2 + C::a63 * k3 + C::a64 * k4 + C::a65 * k5);
    f(t + h, ys, k6);
    y1 = y + h * (C::a71 * k1 + C::a73 * k3 + C::a74 * k4 + C::a75 * k5 + C::a76 * k6);
    f(t + h, y1, k7);
    require_finite(y1, t + h);
    require_finite(k7, t + h);

    err = h * (C::e1 * k1 + C::e3 * k3 + C::e4 * k4 + C::e5 * k5 + C::e6 * k6 + C::e7 * k7);
    const double e = error_norm(err, y, y1, tol);
    const double fac11 = std::pow(e, 0.17);
    double fac = fac11 / std::pow(facold, 0.04);
    fac = std::clamp(fac / 0.9, 0.2, 10.0);
    double hnew = h / fac;

    if (e <= 1.0) {
      facold = std::max(e, 1e-4);
      Trajectory::Segment seg;
      seg.origin = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = y1 - y;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (C::d1 * k1 + C::d3 * k3 + C::d4 * k4 + C::d5 * k5 + C::d6 * k6 + C::d7 * k7);
      const double tn = last ? t1 : t + h;
      tr.push_step(tn, y1, std::move(seg));
      k1 = k7;
      y = y1;
      t = tn;
      if (last) break;
      if (std::abs(hnew) > span) hnew = dir * span;
      if (reject) hnew = dir * std::min(std::abs(hnew), std::abs(h));
      reject = false;
    } else {
      hnew = h / std::min(10.0, fac11 / 0.9);
      reject = true;
      last = false;
    }
    h = hnew;
  }
  tr.finish(dir < 0.0);
  return tr;
}

template <class Rhs>
Trajectory rk4(Rhs& f, const Vec& x0, double t0, double t1, const IntegratorOptions& opt) {
  const Eigen::Index n = x0.size();
  const double span = std::abs(t1 - t0);
  const double hnom = opt.rk4_step > 0.0 ? opt.rk4_step : 0.5 * std::pow(opt.tol, 0.25);
  const auto nsteps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / hnom)));
  if (nsteps > opt.max_steps) throw StepFailure("rk4 step count exceeds the step budget");
  const double h = (t1 - t0) / static_cast<double>(nsteps);

  Trajectory tr;
  tr.push_start(t0, x0);
  Vec y = x0, k1(n), k2(n), k3(n), k4(n), ys(n), y1(n), f1(n);
  f(t0, y, k1);
  require_finite(k1, t0);
  for (std::size_t i = 0; i < nsteps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    ys = y + 0.5 * h * k1;
    f(t + 0.5 * h, ys, k2);
    ys = y + 0.5 * h * k2;
    f(t + 0.5 * h, ys, k3);
    ys = y + h * k3;
    f(t + h, ys, k4);
    y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double tn = i + 1 == nsteps ? t1 : t + h;
    f(tn, y1, f1);
    require_finite(y1, tn);
    require_finite(f1, tn);
    // cubic Hermite: the quartic form with r5 = 0
    Trajectory::Segment seg;
    seg.origin = t;
    seg.h = h;
    seg.r1 = y;
    seg.r2 = y1 - y;
    seg.r3 = h * k1 - seg.r2;
    seg.r4 = seg.r2 - h * f1 - seg.r3;
    tr.push_step(tn, y1, std::move(seg));
    y = y1;
    k1 = f1;
  }
  tr.finish(t1 < t0);
  return tr;
}

}  // namespace detail

// Generic entry point: f(t, y, dydt) fills dydt.
template <class Rhs>
Trajectory integrate_rhs(Rhs&& f, const Vec& x0, double t0, double t1, const IntegratorOptions& opt) {
  if (!(opt.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (!x0.allFinite()) throw NonFinite("initial state is not finite");
  if (t1 == t0) return Trajectory::single(t0, x0);
  if (opt.scheme == Scheme::rk4) return detail::rk4(f, x0, t0, t1, opt);
  return detail::dopri5(f, x0, t0, t1, opt);
}

inline auto field_rhs(const PerturbedField& field) {
  return [&field](double, const Vec& y, Vec& dy) { dy = field.rhs(y); };
}

inline Trajectory integrate(const PerturbedField& field, const Vec& x0, double t0, double t1,
                            const IntegratorOptions& opt) {
  if (x0.size() != field.dim) throw DomainError("initial state has the wrong dimension");
  return integrate_rhs(field_rhs(field), x0, t0, t1, opt);
}

inline Trajectory integrate(const PerturbedField& field, const Vec& x0, double t0, double t1, double tol) {
  IntegratorOptions opt;
  opt.tol = tol;
  return integrate(field, x0, t0, t1, opt);
}

enum class Crossing { up = 1, down = -1, both = 0 };

struct Section {
  std::function<double(const Vec&)> level_fn;
  Crossing direction = Crossing::both;
};

// Sign changes of level(x(t)) on the dense output, 8 samples per step, 60
// bisections. Crossings with |d level/dt| < 1e-8 |x'(t)| are rejected.
inline std::vector<Event> find_crossings(const Trajectory& tr, const Section& sec) {
  std::vector<Event> out;
  if (tr.size() < 2) return out;
  auto level = [&](double t) { return sec.level_fn(tr.at(t)); };
  auto accept = [&](double la, double lb) {
    switch (sec.direction) {
      case Crossing::up: return la < 0.0 && lb >= 0.0;
      case Crossing::down: return la > 0.0 && lb <= 0.0;
      default: return (la < 0.0 && lb >= 0.0) || (la > 0.0 && lb <= 0.0);
    }
  };
  constexpr int samples = 8;
  const auto& ts = tr.times();
  double tprev = ts.front();
  double lprev = level(tprev);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double ta = ts[i];
    const double hb = ts[i + 1] - ta;
    for (int s = 1; s <= samples; ++s) {
      const double tb = s == samples ? ts[i + 1] : ta + hb * s / samples;
      const double lb = level(tb);
      if (accept(lprev, lb)) {
        double lo = tprev, hi = tb, llo = lprev;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid == lo || mid == hi) break;
          const double lm = level(mid);
          if ((llo < 0.0) == (lm < 0.0) && lm != 0.0) {
            lo = mid;
            llo = lm;
          } else {
            hi = mid;
          }
        }
        const double tc = std::abs(level(lo)) < std::abs(level(hi)) ? lo : hi;
        const double dt = std::max(1e-7 * std::abs(hb), 1e-12 * std::max(1.0, std::abs(tc)));
        const Vec xp = tr.at(tc + dt), xm = tr.at(tc - dt);
        const double slope = (sec.level_fn(xp) - sec.level_fn(xm)) / (2.0 * dt);
        const double speed = ((xp - xm) / (2.0 * dt)).norm();
        if (!(std::abs(slope) >= 1e-8 * speed) || speed == 0.0)
          throw DegenerateCrossing("section crossing at t = " + std::to_string(tc) + " is not transverse");
        if (out.empty() || tc > out.back().time) out.push_back({tc, tr.at(tc), slope});
      }
      tprev = tb;
      lprev = lb;
    }
  }
  return out;
}

inline Trajectory detect_crossings(const PerturbedField& field, const Vec& x0, const Section& section, double t0,
                                   double t1, double tol) {
  Trajectory tr = integrate(field, x0, t0, t1, tol);
  tr.events() = find_crossings(tr, section);
  return tr;
}

using Integrand = std::function<double(double, const Vec&)>;

// Integral of integrand(t, x(t)) from t0 to t1 (signed), with one accumulator
// component appended to the state and controlled with the same tolerance.
inline double quadrature_along(const PerturbedField& field, const Vec& x0, const Integrand& integrand, double t0,
                               double t1, const IntegratorOptions& opt) {
  if (t1 == t0) return 0.0;
  const Eigen::Index n = x0.size();
  Vec y0(n + 1);
  y0.head(n) = x0;
  y0(n) = 0.0;
  auto rhs = [&](double t, const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    dy.resize(n + 1);
    dy.head(n) = field.rhs(x);
    dy(n) = integrand(t, x);
  };
  const Trajectory tr = integrate_rhs(rhs, y0, t0, t1, opt);
  return tr.final()(n);
}

inline double quadrature_along(const PerturbedField& field, const Vec& x0, const Integrand& integrand, double t0,
                               double t1, double tol) {
  IntegratorOptions opt;
  opt.tol = tol;
  return quadrature_along(field, x0, integrand, t0, t1, opt);
}

}  // namespace mlab
