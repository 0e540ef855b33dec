#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dgvf/field.hpp"
#include "dgvf/graph.hpp"
#include "dgvf/paths.hpp"
#include "dgvf/random.hpp"
#include "dgvf/robot.hpp"
#include "dgvf/vec.hpp"

namespace dgvf {

enum class ModelKind { integrator, unicycle };

// Seeded initial-state sampler: positions uniform in an axis-aligned box,
// heading uniform in (-pi, pi], virtual coordinates uniform in an interval,
// optionally offset by each robot's reference coordinate.
struct InitSpec {
  Vec box_center;     // size n
  Vec box_halfwidth;  // size n
  double w1_lo = 0.0, w1_hi = 0.0;
  double w2_lo = 0.0, w2_hi = 0.0;
  bool w_relative_to_ref = true;
};

struct CheckThresholds {
  double max_phi = 1e-2;
  double max_coord_err = 1e-3;
  std::optional<double> speed_rel_tol;  // relative bound on |wdot - wdot*| over the last 10%
};

struct Scenario {
  std::string name;
  int n = 3;
  int robot_count = 1;
  ModelKind model = ModelKind::integrator;
  std::vector<CompositeManifold> manifolds;  // one per robot
  Topology topology;
  OffsetTable offsets;
  FieldGains gains;
  PropagationSpeeds speeds;
  double k_theta = 2.0;
  SaturationLimits saturation;
  double dt = 0.01;
  double duration = 60.0;
  InitSpec init;
  std::uint64_t seed = 1;
  int metrics_stride = 1;  // record metrics every k-th step
  std::shared_ptr<const RealTimeTarget> target;  // set in real-time mode
  std::string target_spec_text;  // source spec of the target trace, for dumps
  CheckThresholds check;
  std::vector<std::string> load_warnings;

  int steps() const { return static_cast<int>(std::floor(duration / dt + 1e-9)); }
};

struct RobotState {
  Vec x;
  double theta = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
};

struct WorldState {
  double t = 0.0;
  int step = 0;
  std::vector<RobotState> robots;
  long degenerate_count = 0;  // unicycle steps with near-zero planar field
};

struct EngineError : std::runtime_error {
  int robot;
  int step;
  EngineError(int robot_id, int step_index, const std::string& what)
      : std::runtime_error("robot " + std::to_string(robot_id) + " at step " +
                           std::to_string(step_index) + ": " + what),
        robot(robot_id), step(step_index) {}
};

// Column-ordered per-record metrics. With metrics_stride == 1 there is one
// record per step plus the initial one.
struct MetricsLog {
  std::vector<int> step;
  std::vector<double> t;
  std::vector<std::vector<double>> phi_norm;   // [record][robot]
  std::vector<std::vector<double>> coord_w1;   // [record][edge]
  std::vector<std::vector<double>> coord_w2;   // [record][edge]
  std::vector<std::vector<double>> w1;         // [record][robot]
  std::vector<std::vector<double>> w2;         // [record][robot]
  // filled after the run by estimate_parametric_speeds:
  std::vector<std::vector<double>> w1dot;      // [record][robot]
  std::vector<std::vector<double>> w2dot;      // [record][robot]

  std::size_t records() const { return t.size(); }
};

struct TrajectoryLog {
  std::vector<int> step;
  std::vector<double> t;
  std::vector<std::vector<RobotState>> robots;  // [record][robot]
};

struct RunSummary {
  double final_max_phi_norm = 0.0;
  double final_max_coord_err = 0.0;
  double mean_wdot_err_last10 = 0.0;  // mean over robots, records, both coordinates
  // supporting detail
  double mean_w1dot_err_last10 = 0.0;
  double mean_w2dot_err_last10 = 0.0;
  double max_w1dot_err_last10 = 0.0;
  double max_w2dot_err_last10 = 0.0;
  double max_coord_err_last10 = 0.0;
  long degenerate_count = 0;
  double wall_seconds = 0.0;
};

struct RunResult {
  WorldState world;
  MetricsLog metrics;
  TrajectoryLog trajectory;
  RunSummary summary;
};

inline WorldState initial_world(const Scenario& sc, std::uint64_t seed) {
  SplitMix64 rng(seed);
  WorldState w;
  w.robots.resize(static_cast<std::size_t>(sc.robot_count));
  for (int i = 0; i < sc.robot_count; ++i) {
    RobotState& r = w.robots[static_cast<std::size_t>(i)];
    r.x.resize(static_cast<std::size_t>(sc.n));
    for (int j = 0; j < sc.n; ++j)
      r.x[static_cast<std::size_t>(j)] =
          rng.uniform(sc.init.box_center[j] - sc.init.box_halfwidth[j],
                      sc.init.box_center[j] + sc.init.box_halfwidth[j]);
    if (sc.model == ModelKind::unicycle) r.theta = rng.uniform(-M_PI, M_PI);
    const double base1 = sc.init.w_relative_to_ref ? sc.offsets.w1_ref[static_cast<std::size_t>(i)] : 0.0;
    const double base2 = sc.init.w_relative_to_ref ? sc.offsets.w2_ref[static_cast<std::size_t>(i)] : 0.0;
    r.w1 = base1 + rng.uniform(sc.init.w1_lo, sc.init.w1_hi);
    r.w2 = base2 + rng.uniform(sc.init.w2_lo, sc.init.w2_hi);
  }
  return w;
}

namespace detail {

struct RobotDeriv {
  Vec dx;
  double dtheta = 0.0;
  double dw1 = 0.0;
  double dw2 = 0.0;
};

// Derivative of robot i's own state at substep time tau. Neighbor information
// enters only through the residuals (c1, c2), which are computed once per
// step from the snapshot and held constant across RK4 substeps.
inline RobotDeriv robot_derivative(const Scenario& sc, int i, const RobotState& s, double c1,
                                   double c2, double tau, long* degenerate_count) {
  const CompositeManifold& m = sc.manifolds[static_cast<std::size_t>(i)];
  GeneralizedState xi{s.x, s.w1, s.w2};
  Vec X = composite_field(m, xi, sc.gains, sc.speeds, c1, c2, tau);
  RobotDeriv d;
  if (sc.model == ModelKind::integrator) {
    d.dx.assign(X.begin(), X.begin() + sc.n);
    d.dtheta = 0.0;
    d.dw1 = X[static_cast<std::size_t>(sc.n)];
    d.dw2 = X[static_cast<std::size_t>(sc.n) + 1];
  } else {
    ControlInputs u = unicycle_controls(X, s.theta, sc.k_theta, sc.saturation);
    if (u.degenerate && degenerate_count) ++*degenerate_count;
    UnicycleDeriv ud = unicycle_derivative(s.theta, u, X);
    d.dx = {ud.dx1, ud.dx2, ud.dx3};
    d.dtheta = ud.dtheta;
    d.dw1 = ud.dw1;
    d.dw2 = ud.dw2;
  }
  return d;
}

inline RobotState advance(const RobotState& s, const RobotDeriv& d, double h) {
  RobotState r = s;
  for (std::size_t j = 0; j < r.x.size(); ++j) r.x[j] = s.x[j] + h * d.dx[j];
  r.theta = s.theta + h * d.dtheta;
  r.w1 = s.w1 + h * d.dw1;
  r.w2 = s.w2 + h * d.dw2;
  return r;
}

}  // namespace detail

// One synchronous round: snapshot all virtual coordinates, compute each
// robot's residuals from the snapshot (neighbors only), then advance every
// robot one RK4 step. Within the step a robot sees only its own state; the
// snapshot and residuals stay frozen.
inline void step(WorldState& world, const Scenario& sc) {
  const int N = sc.robot_count;
  std::vector<double> w1s(static_cast<std::size_t>(N)), w2s(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    w1s[static_cast<std::size_t>(i)] = world.robots[static_cast<std::size_t>(i)].w1;
    w2s[static_cast<std::size_t>(i)] = world.robots[static_cast<std::size_t>(i)].w2;
  }
  const double h = sc.dt;
  const double t0 = world.t;
  for (int i = 0; i < N; ++i) {
    auto [c1, c2] = coordination_residuals(sc.topology, sc.offsets, w1s, w2s, i);
    RobotState& s = world.robots[static_cast<std::size_t>(i)];
    long* dc = &world.degenerate_count;
    const auto k1 = detail::robot_derivative(sc, i, s, c1, c2, t0, dc);
    const auto k2 = detail::robot_derivative(sc, i, detail::advance(s, k1, h / 2), c1, c2, t0 + h / 2, dc);
    const auto k3 = detail::robot_derivative(sc, i, detail::advance(s, k2, h / 2), c1, c2, t0 + h / 2, dc);
    const auto k4 = detail::robot_derivative(sc, i, detail::advance(s, k3, h), c1, c2, t0 + h, dc);
    for (std::size_t j = 0; j < s.x.size(); ++j)
      s.x[j] += h / 6.0 * (k1.dx[j] + 2.0 * k2.dx[j] + 2.0 * k3.dx[j] + k4.dx[j]);
    s.theta = wrap_angle(s.theta + h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta));
    s.w1 += h / 6.0 * (k1.dw1 + 2.0 * k2.dw1 + 2.0 * k3.dw1 + k4.dw1);
    s.w2 += h / 6.0 * (k1.dw2 + 2.0 * k2.dw2 + 2.0 * k3.dw2 + k4.dw2);
    if (!all_finite(s.x) || !std::isfinite(s.theta) || !std::isfinite(s.w1) || !std::isfinite(s.w2))
      throw EngineError(i, world.step, "non-finite state");
  }
  ++world.step;
  world.t = world.step * sc.dt;
}

// Central finite differences of a per-record, per-robot series over time;
// one-sided at the ends. Needs at least two records.
inline std::vector<std::vector<double>> estimate_parametric_speeds(
    const std::vector<double>& times, const std::vector<std::vector<double>>& w) {
  const std::size_t S = times.size();
  if (S < 2) throw std::invalid_argument("estimate_parametric_speeds: need at least two records");
  const std::size_t N = w.front().size();
  std::vector<std::vector<double>> out(S, std::vector<double>(N));
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t lo = s == 0 ? 0 : s - 1;
    const std::size_t hi = s + 1 == S ? s : s + 1;
    const double dt = times[hi] - times[lo];
    for (std::size_t i = 0; i < N; ++i) out[s][i] = (w[hi][i] - w[lo][i]) / dt;
  }
  return out;
}

namespace detail {

inline void record_metrics(const Scenario& sc, const WorldState& world, MetricsLog& log,
                           TrajectoryLog& traj) {
  const int N = sc.robot_count;
  log.step.push_back(world.step);
  log.t.push_back(world.t);
  std::vector<double> phis(static_cast<std::size_t>(N));
  std::vector<double> w1s(static_cast<std::size_t>(N)), w2s(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const RobotState& s = world.robots[static_cast<std::size_t>(i)];
    phis[static_cast<std::size_t>(i)] =
        norm(sc.manifolds[static_cast<std::size_t>(i)].phi(s.x, s.w1, s.w2, world.t));
    w1s[static_cast<std::size_t>(i)] = s.w1;
    w2s[static_cast<std::size_t>(i)] = s.w2;
  }
  std::vector<double> e1, e2;
  e1.reserve(sc.topology.edges().size());
  e2.reserve(sc.topology.edges().size());
  for (auto [i, j] : sc.topology.edges()) {
    e1.push_back(w1s[static_cast<std::size_t>(i)] - w1s[static_cast<std::size_t>(j)] - sc.offsets.delta1(i, j));
    e2.push_back(w2s[static_cast<std::size_t>(i)] - w2s[static_cast<std::size_t>(j)] - sc.offsets.delta2(i, j));
  }
  log.phi_norm.push_back(std::move(phis));
  log.coord_w1.push_back(std::move(e1));
  log.coord_w2.push_back(std::move(e2));
  log.w1.push_back(std::move(w1s));
  log.w2.push_back(std::move(w2s));
  traj.step.push_back(world.step);
  traj.t.push_back(world.t);
  traj.robots.push_back(world.robots);
}

}  // namespace detail

inline RunResult run(const Scenario& sc, std::uint64_t seed) {
  const auto wall_start = std::chrono::steady_clock::now();
  RunResult res;
  res.world = initial_world(sc, seed);
  detail::record_metrics(sc, res.world, res.metrics, res.trajectory);
  const int steps = sc.steps();
  const int stride = sc.metrics_stride > 0 ? sc.metrics_stride : 1;
  for (int s = 1; s <= steps; ++s) {
    step(res.world, sc);
    if (s % stride == 0 || s == steps) detail::record_metrics(sc, res.world, res.metrics, res.trajectory);
  }

  MetricsLog& log = res.metrics;
  if (log.records() >= 2) {
    log.w1dot = estimate_parametric_speeds(log.t, log.w1);
    log.w2dot = estimate_parametric_speeds(log.t, log.w2);
  }

  RunSummary& sum = res.summary;
  sum.degenerate_count = res.world.degenerate_count;
  const std::size_t R = log.records();
  for (double p : log.phi_norm.back()) sum.final_max_phi_norm = std::max(sum.final_max_phi_norm, p);
  for (double e : log.coord_w1.back()) sum.final_max_coord_err = std::max(sum.final_max_coord_err, std::abs(e));
  for (double e : log.coord_w2.back()) sum.final_max_coord_err = std::max(sum.final_max_coord_err, std::abs(e));
  // transient window: the last 10% of records
  const std::size_t first = R - std::max<std::size_t>(1, R / 10);
  double acc1 = 0.0, acc2 = 0.0;
  std::size_t cnt = 0;
  for (std::size_t s = first; s < R; ++s) {
    for (double e : log.coord_w1[s]) sum.max_coord_err_last10 = std::max(sum.max_coord_err_last10, std::abs(e));
    for (double e : log.coord_w2[s]) sum.max_coord_err_last10 = std::max(sum.max_coord_err_last10, std::abs(e));
    if (log.w1dot.empty()) continue;
    for (std::size_t i = 0; i < log.w1dot[s].size(); ++i) {
      const double e1 = std::abs(log.w1dot[s][i] - sc.speeds.w1dot_star);
      const double e2 = std::abs(log.w2dot[s][i] - sc.speeds.w2dot_star);
      acc1 += e1;
      acc2 += e2;
      sum.max_w1dot_err_last10 = std::max(sum.max_w1dot_err_last10, e1);
      sum.max_w2dot_err_last10 = std::max(sum.max_w2dot_err_last10, e2);
      ++cnt;
    }
  }
  if (cnt > 0) {
    sum.mean_w1dot_err_last10 = acc1 / static_cast<double>(cnt);
    sum.mean_w2dot_err_last10 = acc2 / static_cast<double>(cnt);
    sum.mean_wdot_err_last10 = (acc1 + acc2) / static_cast<double>(2 * cnt);
  }
  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return res;
}

}  // namespace dgvf
