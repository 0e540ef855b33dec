#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dgvf/vec.hpp"

namespace dgvf {

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  if (a > M_PI) a -= 2.0 * M_PI;
  return a;
}

struct SaturationLimits {
  std::optional<double> v;
  std::optional<double> uz;
  std::optional<double> utheta;

  bool any() const { return v || uz || utheta; }
};

struct ControlInputs {
  double v = 0.0;       // forward speed, >= 0
  double uz = 0.0;      // vertical rate
  double utheta = 0.0;  // yaw rate
  bool degenerate = false;  // planar field components were ~zero
};

// Unicycle controls from a field value X in R^{n+2}, n >= 2:
//   v       = sqrt(X1^2 + X2^2)
//   uz      = v X3 / sqrt(X1^2 + X2^2), i.e. X3 once the ratio cancels
//   utheta  = k_theta * wrap(atan2(X2, X1) - theta)
// The heading error is wrapped before the gain so the command always takes
// the short way around; the raw difference would unwind near +-pi. When the
// planar components nearly vanish (excluded by the theory) we flag the state,
// command zero yaw rate and keep v from the formula.
inline ControlInputs unicycle_controls(const Vec& X, double theta, double k_theta,
                                       const SaturationLimits& limits = {},
                                       double epsilon = 1e-12) {
  if (X.size() < 3) throw std::invalid_argument("unicycle_controls: field must have at least 3 components");
  ControlInputs u;
  const double planar2 = X[0] * X[0] + X[1] * X[1];
  u.v = std::sqrt(planar2);
  if (planar2 < epsilon * epsilon) {
    u.degenerate = true;
    u.uz = 0.0;
    u.utheta = 0.0;
  } else {
    u.uz = X[2];
    const double theta_d = std::atan2(X[1], X[0]);
    u.utheta = k_theta * wrap_angle(theta_d - theta);
  }
  if (limits.v && u.v > *limits.v) u.v = *limits.v;
  if (limits.uz) u.uz = std::clamp(u.uz, -*limits.uz, *limits.uz);
  if (limits.utheta) u.utheta = std::clamp(u.utheta, -*limits.utheta, *limits.utheta);
  return u;
}

struct UnicycleDeriv {
  double dx1, dx2, dx3, dtheta, dw1, dw2;
};

// Pose rates from the controls; the virtual coordinates are internal states
// and advance directly with the field's last two rows.
inline UnicycleDeriv unicycle_derivative(double theta, const ControlInputs& u, const Vec& X) {
  if (X.size() < 5) throw std::invalid_argument("unicycle_derivative: field must have n+2 >= 5 components");
  UnicycleDeriv d;
  d.dx1 = u.v * std::cos(theta);
  d.dx2 = u.v * std::sin(theta);
  d.dx3 = u.uz;
  d.dtheta = u.utheta;
  d.dw1 = X[X.size() - 2];
  d.dw2 = X[X.size() - 1];
  return d;
}

// Single integrator: the generalized state follows the field directly.
inline Vec integrator_derivative(const Vec& X) { return X; }

}  // namespace dgvf
