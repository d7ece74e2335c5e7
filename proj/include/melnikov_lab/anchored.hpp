#pragma once

// Integration along an orbit that is known accurately at any time (closed form
// or a stored trajectory), re-seeded at evenly spaced anchors.
//
// Orbits that pass near a saddle (homoclinic orbits, periodic orbits close to
// a separatrix) amplify seed errors like exp(lambda t). Integrating each piece
// outward from its own anchor keeps that amplification bounded by
// exp(lambda * spacing / 2) no matter how long the window is.

#include <cmath>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "ode.hpp"

namespace mlab {

struct OrbitGuide {
  std::function<Vec(double)> state;
  double anchor_spacing = 4.0;  // infinity: single seed at the window start

  Vec operator()(double t) const { return state(t); }

  static OrbitGuide from_trajectory(Trajectory tr, double spacing = std::numeric_limits<double>::infinity()) {
    auto shared = std::make_shared<const Trajectory>(std::move(tr));
    return {[shared](double t) { return shared->at(t); }, spacing};
  }
};

using VecIntegrand = std::function<Vec(double, const Vec&)>;

// Orbit and running integrals over [lower, upper], assembled from pieces.
class PiecewiseOrbit {
 public:
  double lower() const { return pieces_.front().lo; }
  double upper() const { return pieces_.back().hi; }
  Eigen::Index dim() const { return n_; }
  Eigen::Index accumulators() const { return m_; }

  Vec state(double t) const { return augmented(t).head(n_); }

  // integral from lower() to t of every accumulated integrand
  Vec cumulative(double t) const {
    const std::size_t i = piece_index(t);
    const Piece& p = pieces_[i];
    return p.offset + augmented_in(p, t).tail(m_) - p.acc_lo;
  }

  Vec integral(double a, double b) const { return cumulative(b) - cumulative(a); }

  // joined dense trajectory; accumulators (if any) trail the state components
  Trajectory trajectory() const {
    std::vector<Trajectory> parts;
    for (const auto& p : pieces_) {
      if (p.bwd.size() > 1) parts.push_back(p.bwd);
      if (p.fwd.size() > 1) parts.push_back(p.fwd);
    }
    return Trajectory::join(parts);
  }

  template <class Rhs>
  static PiecewiseOrbit build(Rhs&& field_rhs, const OrbitGuide& guide, const VecIntegrand& integrand,
                              Eigen::Index m, double a, double b, const IntegratorOptions& opt) {
    if (!(b > a)) throw DomainError("anchored integration needs a window with upper > lower");
    PiecewiseOrbit po;
    const Vec probe = guide(a);
    po.n_ = probe.size();
    po.m_ = m;
    const Eigen::Index n = po.n_;

    auto rhs = [&](double t, const Vec& y, Vec& dy) {
      dy.resize(n + m);
      const Vec x = y.head(n);
      Vec fx(n);
      field_rhs(t, x, fx);
      dy.head(n) = fx;
      if (m > 0) dy.tail(m) = integrand(t, x);
    };

    const bool single = !std::isfinite(guide.anchor_spacing);
    const auto count = single ? std::size_t{1}
                              : static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / guide.anchor_spacing)));
    const double w = (b - a) / static_cast<double>(count);
    Vec offset = Vec::Zero(m);
    for (std::size_t i = 0; i < count; ++i) {
      Piece p;
      p.lo = a + static_cast<double>(i) * w;
      p.hi = i + 1 == count ? b : a + static_cast<double>(i + 1) * w;
      p.anchor = single ? a : 0.5 * (p.lo + p.hi);
      Vec y0(n + m);
      y0.head(n) = guide(p.anchor);
      y0.tail(m).setZero();
      p.fwd = integrate_rhs(rhs, y0, p.anchor, p.hi, opt);
      p.bwd = integrate_rhs(rhs, y0, p.anchor, p.lo, opt);
      p.acc_lo = p.bwd.front().tail(m);
      p.offset = offset;
      offset += p.fwd.back().tail(m) - p.acc_lo;
      po.pieces_.push_back(std::move(p));
    }
    return po;
  }

 private:
  struct Piece {
    double lo = 0.0, hi = 0.0, anchor = 0.0;
    Trajectory fwd, bwd;
    Vec acc_lo, offset;
  };

  std::size_t piece_index(double t) const {
    std::size_t i = 0;
    while (i + 1 < pieces_.size() && t > pieces_[i].hi) ++i;
    return i;
  }

  static Vec augmented_in(const Piece& p, double t) { return t >= p.anchor ? p.fwd.at(t) : p.bwd.at(t); }

  Vec augmented(double t) const { return augmented_in(pieces_[piece_index(t)], t); }

  std::vector<Piece> pieces_;
  Eigen::Index n_ = 0;
  Eigen::Index m_ = 0;
};

inline auto autonomous_rhs(const VecMap& f) {
  return [f](double, const Vec& x, Vec& dx) { dx = f(x); };
}

}  // namespace mlab
