#pragma once

// Obstruction integrals and Melnikov functions.
//
// Conditionally convergent integrals are only ever evaluated on windows
// [T_{-k}, T_k] whose endpoints belong to a TimeSequence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "anchored.hpp"
#include "parallel.hpp"
#include "variational.hpp"

namespace mlab {

enum class SequenceSource { section_crossings, uniform, angle_zeros };

inline const char* to_string(SequenceSource s) {
  switch (s) {
    case SequenceSource::section_crossings: return "section-crossings";
    case SequenceSource::uniform: return "uniform";
    default: return "angle-zeros";
  }
}

struct TimeSequence {
  std::vector<double> times;
  std::size_t origin_index = 0;
  SequenceSource source = SequenceSource::uniform;

  // largest k with both T_{-k} and T_k present
  int levels() const {
    if (times.empty()) return 0;
    return static_cast<int>(std::min(origin_index, times.size() - 1 - origin_index));
  }

  double operator[](int j) const { return times.at(static_cast<std::size_t>(static_cast<long>(origin_index) + j)); }

  void validate() const {
    if (times.empty()) throw DomainError("empty time sequence");
    if (origin_index >= times.size()) throw DomainError("time sequence origin out of range");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw DomainError("time sequence is not strictly increasing");
  }

  static TimeSequence uniform(double spacing, int K, double center = 0.0) {
    if (!(spacing > 0.0) || K < 1) throw DomainError("uniform sequence needs spacing > 0 and K >= 1");
    TimeSequence s;
    s.source = SequenceSource::uniform;
    for (int j = -K; j <= K; ++j) s.times.push_back(center + spacing * j);
    s.origin_index = static_cast<std::size_t>(K);
    return s;
  }

  // origin at the time of smallest magnitude (earlier one on ties), trimmed to K levels
  static TimeSequence from_times(std::vector<double> t, SequenceSource src, int K) {
    TimeSequence s;
    s.source = src;
    if (t.empty()) return s;
    std::size_t o = 0;
    for (std::size_t i = 1; i < t.size(); ++i)
      if (std::abs(t[i]) < std::abs(t[o])) o = i;
    const std::size_t lo = o >= static_cast<std::size_t>(K) ? o - K : 0;
    const std::size_t hi = std::min(t.size() - 1, o + K);
    s.times.assign(t.begin() + static_cast<long>(lo), t.begin() + static_cast<long>(hi) + 1);
    s.origin_index = o - lo;
    return s;
  }
};

// Crossings of a section along an orbit re-seeded from its guide; the window
// [-L, L] doubles until K levels are available on both sides.
inline TimeSequence section_sequence(const VecMap& flow, const OrbitGuide& guide, const Section& sec, int K, double tol,
                                     SequenceSource src = SequenceSource::section_crossings, double half_span = 16.0) {
  IntegratorOptions opt;
  opt.tol = tol;
  for (double L = half_span; L <= 1e5; L *= 2.0) {
    const auto po = PiecewiseOrbit::build(autonomous_rhs(flow), guide, {}, 0, -L, L, opt);
    const auto events = find_crossings(po.trajectory(), sec);
    std::vector<double> t;
    for (const auto& e : events) t.push_back(e.time);
    auto seq = TimeSequence::from_times(std::move(t), src, K);
    if (seq.levels() >= K) return seq;
  }
  throw DomainError("section_sequence: fewer than K crossings on each side within |t| <= 1e5");
}

// Times where the angle component equals theta_hat (mod 2 pi), crossing upward.
inline TimeSequence angle_zero_sequence(const VecMap& flow, const OrbitGuide& guide, Eigen::Index angle_index,
                                        double theta_hat, int K, double tol) {
  Section sec{[angle_index, theta_hat](const Vec& x) { return std::sin(x(angle_index) - theta_hat); }, Crossing::up};
  return section_sequence(flow, guide, sec, K, tol, SequenceSource::angle_zeros);
}

struct WindowedValue {
  Vec value;
  bool converged = false;
  int level = 0;      // first k from which successive partials stay within tolerance
  double tail = 0.0;  // |v_K - v_{K-1}|
  std::vector<Vec> partials;

  double scalar() const { return value(0); }
};

// Partial integrals on [T_{-k}, T_k], k = 1..K. Converged when the last two
// successive differences are below max(tol, 1e-10 * scale).
inline WindowedValue nested_windows(const PiecewiseOrbit& po, const TimeSequence& seq, double tol) {
  const int K = seq.levels();
  if (K < 3) throw DomainError("nested windows need at least 3 sequence levels");
  WindowedValue w;
  double scale = 0.0;
  for (int k = 1; k <= K; ++k) {
    w.partials.push_back(po.integral(seq[-k], seq[k]));
    scale = std::max(scale, w.partials.back().cwiseAbs().maxCoeff());
  }
  const double thr = std::max(tol, 1e-10 * scale);
  auto diff = [&](int k) { return (w.partials[k - 1] - w.partials[k - 2]).cwiseAbs().maxCoeff(); };
  w.value = w.partials.back();
  w.tail = diff(K);
  w.converged = diff(K) < thr && diff(K - 1) < thr;
  w.level = K;
  for (int k = K; k >= 2 && diff(k) < thr; --k) w.level = k;
  return w;
}

inline VecIntegrand obstruction_integrand(const PerturbedField& field, const ScalarIntegral& F) {
  return [&field, &F](double, const Vec& x) {
    Vec v(1);
    v(0) = F.apply(x, field.x1(x));
    return v;
  };
}

// I_{F,gamma} over one period along a stored unperturbed orbit.
inline double obstruction_periodic(const PerturbedField& field, const ScalarIntegral& F, const Trajectory& orbit,
                                   double period, double tol) {
  const auto f0 = field.with_epsilon(0.0);
  const double t0 = orbit.t_begin();
  return quadrature_along(
      f0, orbit.front(), [&](double, const Vec& x) { return F.apply(x, field.x1(x)); }, t0, t0 + period, tol);
}

// Same integral along an orbit given by a guide, re-seeded at anchors.
inline double obstruction_periodic(const PerturbedField& field, const ScalarIntegral& F, const OrbitGuide& orbit,
                                   double t0, double period, double tol) {
  IntegratorOptions opt;
  opt.tol = tol;
  const auto po = PiecewiseOrbit::build(autonomous_rhs(field.x0_rhs), orbit, obstruction_integrand(field, F), 1, t0,
                                        t0 + period, opt);
  return po.integral(t0, t0 + period)(0);
}

inline WindowedValue obstruction_homoclinic(const PerturbedField& field, const ScalarIntegral& F,
                                            const OrbitGuide& hom_orbit, const TimeSequence& seq, double tol) {
  seq.validate();
  const int K = seq.levels();
  IntegratorOptions opt;
  opt.tol = tol;
  const auto po = PiecewiseOrbit::build(autonomous_rhs(field.x0_rhs), hom_orbit, obstruction_integrand(field, F), 1,
                                        seq[-K], seq[K], opt);
  return nested_windows(po, seq, tol);
}

// Integrand <eta, [X1, Z](x)> on the lifted state (x, eta).
inline VecIntegrand cvf_integrand(const PerturbedField& field, const CommutingField& Z) {
  const Eigen::Index n = field.dim;
  return [&field, &Z, n](double, const Vec& y) {
    const Vec x = y.head(n);
    const JacMap j1 = [&field](const Vec& z) { return field.jacobian1(z); };
    const JacMap jz = [&Z](const Vec& z) { return Z.jacobian(z); };
    Vec v(1);
    v(0) = y.tail(n).dot(lie_bracket(field.x1_rhs, Z.rhs, x, j1, jz));
    return v;
  };
}

// J_{omega,Z,gamma}: the AVE solution is co-integrated with the orbit from
// (gamma(t0), omega(t0)).
inline double obstruction_cvf_periodic(const PerturbedField& field, const CommutingField& Z, const CovectorPath& omega,
                                       const Trajectory& orbit, double period, double tol) {
  const double t0 = omega.t_begin();
  const Eigen::Index n = field.dim;
  Vec y0(2 * n);
  y0.head(n) = orbit.at(t0);
  y0.tail(n) = omega.eta(t0);
  const auto lift = cotangent_lift(field.with_epsilon(0.0));
  IntegratorOptions opt;
  opt.tol = tol;
  const auto po = PiecewiseOrbit::build(autonomous_rhs(lift.x0_rhs), OrbitGuide::from_trajectory(Trajectory::single(t0, y0)),
                                        cvf_integrand(field, Z), 1, t0, t0 + period, opt);
  return po.integral(t0, t0 + period)(0);
}

// one value per basis covector
inline std::vector<double> obstruction_cvf_periodic(const PerturbedField& field, const CommutingField& Z,
                                                    const PeriodicAdjoint& omegas, const Trajectory& orbit,
                                                    double period, double tol) {
  std::vector<double> out;
  for (const auto& w : omegas.basis) out.push_back(obstruction_cvf_periodic(field, Z, w, orbit, period, tol));
  return out;
}

// Homoclinic version on windows from a sequence; the guide returns the lifted
// state (gamma^h(t), omega^h(t)).
inline WindowedValue obstruction_cvf_homoclinic(const PerturbedField& field, const CommutingField& Z,
                                                const OrbitGuide& lifted_orbit, const TimeSequence& seq, double tol) {
  seq.validate();
  const int K = seq.levels();
  const auto lift = cotangent_lift(field.with_epsilon(0.0));
  IntegratorOptions opt;
  opt.tol = tol;
  const auto po = PiecewiseOrbit::build(autonomous_rhs(lift.x0_rhs), lifted_orbit, cvf_integrand(field, Z), 1, seq[-K],
                                        seq[K], opt);
  return nested_windows(po, seq, tol);
}

struct MelnikovCurve {
  std::vector<std::string> parameter_names;
  std::vector<std::vector<double>> parameters;
  std::vector<Vec> values;
  std::vector<int> truncation_levels;
  std::vector<double> tail_estimates;
  std::vector<bool> converged;
  int m = 0;
  int l = 0;
  // recomputes the value at an arbitrary parameter point (used by find_zeros)
  std::function<Vec(const std::vector<double>&)> reevaluate;

  std::size_t size() const { return values.size(); }
  double scalar(std::size_t i) const { return values[i](0); }
  bool all_converged() const { return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; }); }
  double amplitude(Eigen::Index component = 0) const {
    double a = 0.0;
    for (const auto& v : values) a = std::max(a, std::abs(v(component)));
    return a;
  }

  void resize(std::size_t n) {
    parameters.resize(n);
    values.resize(n);
    truncation_levels.assign(n, 0);
    tail_estimates.assign(n, 0.0);
    converged.assign(n, true);
  }
};

// Guide for the autonomized orbit (q(t), theta = t + tau).
inline OrbitGuide shifted_planar_guide(std::function<Vec(double)> q, double tau, double spacing) {
  return {[q = std::move(q), tau](double t) {
            const Vec x = q(t);
            Vec s(x.size() + 1);
            s.head(x.size()) = x;
            s(x.size()) = t + tau;
            return s;
          },
          spacing};
}

struct MelnikovOptions {
  double tol = 1e-11;
  double anchor_spacing = 4.0;
};

// M^{m/l}(tau) = int_0^{mT} DH(q(t)) . g(q(t), t + tau) dt along a resonant
// orbit of the unperturbed planar system.
inline MelnikovCurve subharmonic_melnikov(const PerturbedField& field, const ScalarIntegral& H,
                                          const std::function<Vec(double)>& orbit, double orbit_period, int m, int l,
                                          const std::vector<double>& tau_grid, const MelnikovOptions& opt = {}) {
  if (!field.period) throw DomainError("subharmonic_melnikov needs a time-periodic (autonomized) field");
  if (m < 1 || l < 1 || std::gcd(m, l) != 1) throw DomainError("m and l must be coprime positive integers");
  const double T = *field.period;
  if (std::abs(l * orbit_period - m * T) > 1e-6 * T)
    throw ResonanceMismatch("resonance l T_alpha = m T violated: l T_alpha = " + std::to_string(l * orbit_period) +
                            ", m T = " + std::to_string(m * T));
  const double span = m * T;
  IntegratorOptions iopt;
  iopt.tol = opt.tol;
  auto eval = [field, H, orbit, span, iopt, spacing = opt.anchor_spacing](double tau) {
    const auto po = PiecewiseOrbit::build(autonomous_rhs(field.x0_rhs), shifted_planar_guide(orbit, tau, spacing),
                                          obstruction_integrand(field, H), 1, 0.0, span, iopt);
    return po.integral(0.0, span)(0);
  };
  MelnikovCurve c;
  c.parameter_names = {"tau"};
  c.m = m;
  c.l = l;
  c.resize(tau_grid.size());
  parallel_for(tau_grid.size(), [&](std::size_t i) {
    c.parameters[i] = {tau_grid[i]};
    c.values[i] = Vec::Constant(1, eval(tau_grid[i]));
  });
  c.reevaluate = [eval](const std::vector<double>& p) { return Vec::Constant(1, eval(p.at(0))); };
  return c;
}

// Smallest integer window w with |q(+-w) - saddle| < decay_tol.
inline double homoclinic_window(const std::function<Vec(double)>& q, const Vec& saddle, double decay_tol = 1e-9) {
  for (double w = 1.0; w <= 1000.0; w += 1.0)
    if ((q(w) - saddle).norm() < decay_tol && (q(-w) - saddle).norm() < decay_tol) return w;
  throw DomainError("homoclinic orbit does not approach the saddle within |t| <= 1000");
}

// M(tau) = int DH(q(t)) . g(q(t), t + tau) dt truncated to [-window, window].
// Tail estimate: on each side the outer octave [w/2, w] is split in halves
// with absolute contributions A1 (inner) and A2 (outer); assuming geometric
// decay the remainder beyond w is A2 r / (1 - r), r = A2 / A1.
inline MelnikovCurve homoclinic_melnikov(const PerturbedField& field, const ScalarIntegral& H,
                                         const std::function<Vec(double)>& hom_orbit, const std::vector<double>& tau_grid,
                                         double window, const MelnikovOptions& opt = {}) {
  if (!field.period) throw DomainError("homoclinic_melnikov needs a time-periodic (autonomized) field");
  if (!(window > 0.0)) throw DomainError("window must be positive");
  IntegratorOptions iopt;
  iopt.tol = opt.tol;
  struct Point {
    double value, tail;
  };
  VecIntegrand integrand = [field, H](double, const Vec& x) {
    Vec v(2);
    v(0) = H.apply(x, field.x1(x));
    v(1) = std::abs(v(0));
    return v;
  };
  auto eval = [field, integrand, hom_orbit, window, iopt, spacing = opt.anchor_spacing](double tau) {
    const auto po = PiecewiseOrbit::build(autonomous_rhs(field.x0_rhs), shifted_planar_guide(hom_orbit, tau, spacing),
                                          integrand, 2, -window, window, iopt);
    const double w = window;
    auto side = [&](double a1, double b1, double a2, double b2) {
      const double A1 = po.integral(a1, b1)(1), A2 = po.integral(a2, b2)(1);
      if (!(A1 > 0.0)) return A2;
      const double r = A2 / A1;
      return r < 1.0 ? A2 * r / (1.0 - r) : std::numeric_limits<double>::infinity();
    };
    const double tail = side(0.5 * w, 0.75 * w, 0.75 * w, w) + side(-0.75 * w, -0.5 * w, -w, -0.75 * w);
    return Point{po.integral(-w, w)(0), tail};
  };
  MelnikovCurve c;
  c.parameter_names = {"tau"};
  c.resize(tau_grid.size());
  parallel_for(tau_grid.size(), [&](std::size_t i) {
    const Point p = eval(tau_grid[i]);
    c.parameters[i] = {tau_grid[i]};
    c.values[i] = Vec::Constant(1, p.value);
    c.tail_estimates[i] = p.tail;
    c.converged[i] = p.tail <= std::max(10.0 * opt.tol, 1e-9 * std::max(1.0, std::abs(p.value)));
  });
  c.reevaluate = [eval](const std::vector<double>& p) { return Vec::Constant(1, eval(p.at(0)).value); };
  return c;
}

struct VectorGridPoint {
  double I, theta0, alpha;
};

using HomoclinicFamily = std::function<OrbitGuide(double I, double alpha)>;

// Melnikov vector (M1, M_2..M_m) for fields of the split action-angle form
// with state (x, I, theta): M1 integrates D_theta H^1 = -X1_I, M_k integrates
// dF_k(X1). Windows come from angle-zero times theta^I(T_j) = theta_hat.
inline MelnikovCurve melnikov_vector(const PerturbedField& field, const HomoclinicFamily& hom_family,
                                     const std::vector<ScalarIntegral>& F_list, const std::vector<VectorGridPoint>& grid,
                                     int K, double theta_hat = 0.0, const MelnikovOptions& opt = {}) {
  const Eigen::Index n = field.dim;
  const Eigen::Index iI = n - 2;
  const Eigen::Index iT = n - 1;
  const auto comps = static_cast<Eigen::Index>(F_list.size() + 1);
  VecIntegrand integrand = [field, F_list, iI, comps](double, const Vec& x) {
    const Vec x1 = field.x1(x);
    Vec v(comps);
    v(0) = -x1(iI);
    for (std::size_t k = 0; k < F_list.size(); ++k) v(static_cast<Eigen::Index>(k) + 1) = F_list[k].apply(x, x1);
    return v;
  };
  // captured by value: the reevaluate hook may outlive the arguments
  auto eval = [field, hom_family, integrand, iT, comps, K, theta_hat, opt](const VectorGridPoint& g) {
    const OrbitGuide base = hom_family(g.I, g.alpha);
    const TimeSequence seq = angle_zero_sequence(field.x0_rhs, base, iT, theta_hat, K, opt.tol);
    OrbitGuide shifted{[base, g, iT](double t) {
                         Vec s = base(t);
                         s(iT) += g.theta0;
                         return s;
                       },
                       base.anchor_spacing};
    IntegratorOptions iopt;
    iopt.tol = opt.tol;
    const auto po = PiecewiseOrbit::build(autonomous_rhs(field.x0_rhs), shifted, integrand, comps, seq[-K], seq[K], iopt);
    return nested_windows(po, seq, std::max(opt.tol, 1e-9));
  };
  MelnikovCurve c;
  c.parameter_names = {"I", "theta0", "alpha"};
  c.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const auto w = eval(grid[i]);
    c.parameters[i] = {grid[i].I, grid[i].theta0, grid[i].alpha};
    c.values[i] = w.value;
    c.truncation_levels[i] = w.level;
    c.tail_estimates[i] = w.tail;
    c.converged[i] = w.converged;
  });
  c.reevaluate = [eval](const std::vector<double>& p) { return eval({p.at(0), p.at(1), p.at(2)}).value; };
  return c;
}

struct IndependenceReport {
  Vec value_a, value_b;
  double difference = 0.0;
  bool converged_a = false, converged_b = false;
  bool passed = false;
};

// Evaluates a windowed integral under two sequences; passes when the values
// differ by less than 10x the convergence tolerance.
inline IndependenceReport sequence_independence_check(const std::function<WindowedValue(const TimeSequence&)>& op,
                                                      const TimeSequence& seq_a, const TimeSequence& seq_b,
                                                      double convergence_tol) {
  const auto a = op(seq_a);
  const auto b = op(seq_b);
  IndependenceReport r;
  r.value_a = a.value;
  r.value_b = b.value;
  r.converged_a = a.converged;
  r.converged_b = b.converged;
  r.difference = (a.value - b.value).cwiseAbs().maxCoeff();
  r.passed = r.difference < 10.0 * convergence_tol;
  return r;
}

enum class ZeroClass { simple, degenerate, none_on_grid };

inline const char* to_string(ZeroClass z) {
  switch (z) {
    case ZeroClass::simple: return "simple";
    case ZeroClass::degenerate: return "degenerate";
    default: return "none-on-grid";
  }
}

struct ZeroEntry {
  double parameter;
  double residual;
  double derivative;
  ZeroClass classification;
};

struct ZeroReport {
  std::vector<ZeroEntry> zeros;
  double zero_tol = 0.0;
  double simple_floor = 0.0;

  bool none_on_grid() const { return zeros.empty(); }
  ZeroClass overall() const {
    if (zeros.empty()) return ZeroClass::none_on_grid;
    for (const auto& z : zeros)
      if (z.classification == ZeroClass::simple) return ZeroClass::simple;
    return ZeroClass::degenerate;
  }
};

// Zeros of a scalar one-parameter curve: grid sign changes refined by
// safeguarded secant/bisection on re-evaluated values, derivative by central
// differences with step = grid spacing / 8. Non-positive tolerances select the
// scale-free defaults 1e-8 and 1e-4 times the curve amplitude.
inline ZeroReport find_zeros(const MelnikovCurve& curve, double zero_tol = 0.0, double simple_floor = 0.0) {
  ZeroReport rep;
  const std::size_t n = curve.size();
  if (n == 0) return rep;
  const double amp = curve.amplitude();
  rep.zero_tol = zero_tol > 0.0 ? zero_tol : std::max(1e-8 * amp, std::numeric_limits<double>::min());
  rep.simple_floor = simple_floor > 0.0 ? simple_floor : 1e-4 * amp;

  auto f = [&](double p) { return curve.reevaluate ? curve.reevaluate({p})(0) : std::numeric_limits<double>::quiet_NaN(); };
  auto param = [&](std::size_t i) { return curve.parameters[i].at(0); };
  const double spacing = n > 1 ? std::abs(param(1) - param(0)) : 1.0;

  std::vector<std::pair<double, double>> found;  // (parameter, residual)
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(curve.scalar(i)) < rep.zero_tol) found.emplace_back(param(i), curve.scalar(i));

  for (std::size_t i = 0; i + 1 < n; ++i) {
    double fa = curve.scalar(i), fb = curve.scalar(i + 1);
    if (std::abs(fa) < rep.zero_tol || std::abs(fb) < rep.zero_tol) continue;
    if ((fa < 0.0) == (fb < 0.0)) continue;
    double a = param(i), b = param(i + 1);
    double c = a, fc = fa;
    for (int it = 0; it < 100; ++it) {
      double s = b - fb * (b - a) / (fb - fa);
      const double lo = std::min(a, b), hi = std::max(a, b), w = hi - lo;
      if (it % 3 == 2 || !(s > lo + 0.01 * w && s < hi - 0.01 * w)) s = 0.5 * (a + b);
      c = s;
      fc = f(c);
      if (std::abs(fc) < 1e-3 * rep.zero_tol || w < 1e-14 * std::max(1.0, std::abs(c))) break;
      if ((fc < 0.0) == (fa < 0.0)) {
        a = c;
        fa = fc;
      } else {
        b = c;
        fb = fc;
      }
    }
    found.emplace_back(c, fc);
  }

  std::sort(found.begin(), found.end());
  for (const auto& [p, r] : found) {
    if (!rep.zeros.empty() && std::abs(p - rep.zeros.back().parameter) < 0.5 * spacing) continue;
    const double h = spacing / 8.0;
    const double d = (f(p + h) - f(p - h)) / (2.0 * h);
    ZeroEntry z{p, r, d, ZeroClass::degenerate};
    if (std::abs(r) < rep.zero_tol && std::abs(d) > rep.simple_floor) z.classification = ZeroClass::simple;
    if (std::abs(r) >= rep.zero_tol) continue;
    rep.zeros.push_back(z);
  }
  return rep;
}

}  // namespace mlab
