#pragma once

#include <algorithm>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dgvf/expr.hpp"
#include "dgvf/vec.hpp"

namespace dgvf {

// A curve R -> R^n with exact symbolic first and second derivatives cached at
// construction. All builtin scenarios use n = 3 but nothing here assumes it.
class ParametricCurve {
 public:
  ParametricCurve() = default;

  explicit ParametricCurve(std::vector<Expr> components) : comps_(std::move(components)) {
    d1_.reserve(comps_.size());
    d2_.reserve(comps_.size());
    for (const Expr& c : comps_) {
      d1_.push_back(c.differentiate());
      d2_.push_back(d1_.back().differentiate());
    }
  }

  static ParametricCurve from_strings(const std::vector<std::string>& texts) {
    std::vector<Expr> comps;
    comps.reserve(texts.size());
    for (const std::string& t : texts) comps.push_back(parse_expr(t));
    return ParametricCurve(std::move(comps));
  }

  static ParametricCurve constant(const Vec& p) {
    std::vector<Expr> comps;
    comps.reserve(p.size());
    for (double v : p) comps.push_back(Expr::constant(v));
    return ParametricCurve(std::move(comps));
  }

  int dim() const { return static_cast<int>(comps_.size()); }
  const std::vector<Expr>& components() const { return comps_; }
  const std::vector<Expr>& first_derivatives() const { return d1_; }
  const std::vector<Expr>& second_derivatives() const { return d2_; }

  Vec point(double w) const { return eval(comps_, w); }
  Vec tangent(double w) const { return eval(d1_, w); }
  Vec second(double w) const { return eval(d2_, w); }

 private:
  static Vec eval(const std::vector<Expr>& es, double w) {
    Vec out(es.size());
    for (std::size_t j = 0; j < es.size(); ++j) out[j] = es[j].evaluate(w);
    return out;
  }

  std::vector<Expr> comps_;
  std::vector<Expr> d1_, d2_;
};

// Sampled target trajectory for runs where the interception path is the
// target's measured position rather than a closed-form curve. Lookup is
// linear interpolation, clamped outside the trace. The velocity estimate is a
// backward finite difference over `window` seconds; it stands in for the
// interception tangent, which has no closed form in this mode.
class RealTimeTarget {
 public:
  RealTimeTarget(int dim, double window_seconds = 0.2) : dim_(dim), window_(window_seconds) {}

  void append(double t, Vec p) {
    if (static_cast<int>(p.size()) != dim_) throw std::invalid_argument("target sample: dimension mismatch");
    if (!all_finite(p)) throw std::invalid_argument("target sample: non-finite position");
    if (!times_.empty() && t <= times_.back())
      throw std::invalid_argument("target samples must be strictly increasing in t");
    times_.push_back(t);
    points_.push_back(std::move(p));
  }

  int dim() const { return dim_; }
  double window() const { return window_; }
  std::size_t size() const { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  Vec position(double t) const {
    if (times_.empty()) throw std::logic_error("empty target trace");
    if (t <= times_.front()) return points_.front();
    if (t >= times_.back()) return points_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double u = (t - times_[lo]) / (times_[hi] - times_[lo]);
    Vec out(dim_);
    for (int j = 0; j < dim_; ++j) out[j] = points_[lo][j] + u * (points_[hi][j] - points_[lo][j]);
    return out;
  }

  Vec velocity(double t) const {
    if (times_.empty()) throw std::logic_error("empty target trace");
    Vec zero(dim_, 0.0);
    if (times_.size() < 2) return zero;
    const double ct = std::clamp(t, times_.front(), times_.back());
    if (ct < times_[1]) return zero;  // not enough history yet
    const double t0 = std::max(times_.front(), ct - window_);
    const double span = ct - t0;
    if (span <= 0.0) return zero;
    Vec a = position(t0);
    Vec b = position(ct);
    for (int j = 0; j < dim_; ++j) a[j] = (b[j] - a[j]) / span;
    return a;
  }

 private:
  int dim_;
  double window_;
  std::vector<double> times_;
  std::vector<Vec> points_;
};

// Interception curve f plus enclosing curve g. The union of f(w1) + g(w2)
// over both parameters is the surface the robot is steered onto; phi measures
// the displacement from it.
class CompositeManifold {
 public:
  CompositeManifold() = default;

  CompositeManifold(ParametricCurve f, ParametricCurve g)
      : f_(std::move(f)), g_(std::move(g)) {
    if (f_.dim() != g_.dim()) throw std::invalid_argument("f and g must share the ambient dimension");
  }

  CompositeManifold(std::shared_ptr<const RealTimeTarget> target, ParametricCurve g)
      : target_(std::move(target)), g_(std::move(g)) {
    if (!target_) throw std::invalid_argument("null target");
    if (target_->dim() != g_.dim()) throw std::invalid_argument("target and g must share the ambient dimension");
  }

  int dim() const { return g_.dim(); }
  bool real_time() const { return target_ != nullptr; }
  const ParametricCurve& f() const { return f_; }
  const ParametricCurve& g() const { return g_; }
  const RealTimeTarget& target() const { return *target_; }

  Vec f_point(double w1, double t) const { return target_ ? target_->position(t) : f_.point(w1); }
  // In real-time mode the tangent slot carries the estimated target velocity.
  Vec f_tangent(double w1, double t) const { return target_ ? target_->velocity(t) : f_.tangent(w1); }
  Vec g_point(double w2) const { return g_.point(w2); }
  Vec g_tangent(double w2) const { return g_.tangent(w2); }

  // phi_j = x_j - f_j(w1) - g_j(w2); the n-vector following error.
  Vec phi(const Vec& x, double w1, double w2, double t = 0.0) const {
    if (static_cast<int>(x.size()) != dim()) throw std::invalid_argument("phi: dimension mismatch");
    Vec fp = f_point(w1, t);
    Vec gp = g_point(w2);
    Vec out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] - fp[j] - gp[j];
    return out;
  }

 private:
  ParametricCurve f_;
  std::shared_ptr<const RealTimeTarget> target_;
  ParametricCurve g_;
};

// Sampled bound audit for a curve's first and second derivatives.
struct CurveAudit {
  double max_first = 0.0;
  double max_second = 0.0;
  bool finite = true;

  bool bounded_by(double bound) const { return finite && max_first <= bound && max_second <= bound; }
};

inline CurveAudit audit_curve(const ParametricCurve& c, double w_lo, double w_hi, int samples = 2048) {
  CurveAudit a;
  if (samples < 2) samples = 2;
  for (int s = 0; s < samples; ++s) {
    const double w = w_lo + (w_hi - w_lo) * s / (samples - 1);
    for (int j = 0; j < c.dim(); ++j) {
      const double d1 = c.first_derivatives()[j].evaluate(w);
      const double d2 = c.second_derivatives()[j].evaluate(w);
      if (!std::isfinite(d1) || !std::isfinite(d2)) {
        a.finite = false;
        continue;
      }
      a.max_first = std::max(a.max_first, std::abs(d1));
      a.max_second = std::max(a.max_second, std::abs(d2));
    }
  }
  return a;
}

}  // namespace dgvf
