#include <doctest.h>

#include <cmath>
#include <memory>

#include "dgvf/paths.hpp"
#include "dgvf/random.hpp"
#include "oracles.hpp"

using namespace dgvf;

namespace {

ParametricCurve circle30() { return ParametricCurve::from_strings({"30*cos(w)", "30*sin(w)", "0"}); }
ParametricCurve sine_path() { return ParametricCurve::from_strings({"w", "5*sin(pi*w/50)", "0"}); }

}  // namespace

TEST_CASE("curve_point: circle and sine path anchors") {
  const Vec p = circle30().point(0.0);
  CHECK(p[0] == doctest::Approx(30.0));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK(p[2] == 0.0);

  const Vec q = sine_path().point(25.0);
  CHECK(q[0] == doctest::Approx(25.0));
  CHECK(q[1] == doctest::Approx(5.0).epsilon(1e-12));  // sin(pi/2) = 1

  const ParametricCurve c = ParametricCurve::constant({1.5, -2.0, 0.25});
  const Vec r = c.point(123.0);
  CHECK(r == Vec{1.5, -2.0, 0.25});
}

TEST_CASE("curve_tangent: analytic anchors and finite-difference oracle") {
  const Vec t = circle30().tangent(0.0);
  CHECK(t[0] == doctest::Approx(0.0));
  CHECK(t[1] == doctest::Approx(30.0));

  CHECK(norm(ParametricCurve::constant({3.0, 4.0, 5.0}).tangent(1.0)) == 0.0);

  // star orbit 0.24(cos w + 0.2 sin 4w, sin w + 0.2 cos 4w, 0) at w = 0:
  // derivative (0.192, 0.24, 0), cross-checked by central differences.
  const ParametricCurve star =
      ParametricCurve::from_strings({"0.24*(cos(w)+0.2*sin(4*w))", "0.24*(sin(w)+0.2*cos(4*w))", "0"});
  const Vec ts = star.tangent(0.0);
  CHECK(ts[0] == doctest::Approx(0.192).epsilon(1e-12));
  CHECK(ts[1] == doctest::Approx(0.24).epsilon(1e-12));
  for (int j = 0; j < 3; ++j) {
    const double fd = oracle::central_diff(
        [&](double w) { return star.components()[static_cast<std::size_t>(j)].evaluate(w); }, 0.7);
    CHECK(star.tangent(0.7)[static_cast<std::size_t>(j)] == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("phi: on-manifold zero, unit offset, random recomputation") {
  CompositeManifold m(circle30(), ParametricCurve::constant({0.0, 0.0, 0.0}));

  SUBCASE("point exactly on the manifold") {
    Vec x = m.f_point(0.7, 0.0) + m.g_point(2.0);
    CHECK(norm(m.phi(x, 0.7, 2.0)) == 0.0);
  }
  SUBCASE("unit offset in x1") {
    const Vec phi = m.phi({31.0, 0.0, 0.0}, 0.0, 0.0);
    CHECK(phi[0] == doctest::Approx(1.0));
    CHECK(phi[1] == doctest::Approx(0.0));
    CHECK(phi[2] == 0.0);
  }
  SUBCASE("random states against direct recomputation") {
    CompositeManifold m2(sine_path(),
                         ParametricCurve::from_strings({"10*sin(w)*atan(w)", "0", "10*cos(w)"}));
    SplitMix64 rng(42);
    for (int i = 0; i < 200; ++i) {
      Vec x{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)};
      const double w1 = rng.uniform(-20, 20), w2 = rng.uniform(-20, 20);
      const Vec phi = m2.phi(x, w1, w2);
      for (int j = 0; j < 3; ++j) {
        const double expect = x[static_cast<std::size_t>(j)] -
                              m2.f().components()[static_cast<std::size_t>(j)].evaluate(w1) -
                              m2.g().components()[static_cast<std::size_t>(j)].evaluate(w2);
        CHECK(phi[static_cast<std::size_t>(j)] == doctest::Approx(expect).epsilon(1e-14));
      }
    }
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(m.phi({1.0, 2.0}, 0.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("phi is linear in the spatial coordinates") {
  CompositeManifold m(sine_path(), circle30());
  SplitMix64 rng(7);
  for (int i = 0; i < 100; ++i) {
    Vec x{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
    Vec d{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double w1 = rng.uniform(-5, 5), w2 = rng.uniform(-5, 5);
    const Vec lhs = m.phi(x + d, w1, w2) - m.phi(x, w1, w2);
    for (int j = 0; j < 3; ++j)
      CHECK(lhs[static_cast<std::size_t>(j)] == doctest::Approx(d[static_cast<std::size_t>(j)]).epsilon(1e-12));
  }
}

TEST_CASE("target velocity estimation") {
  SUBCASE("static trace gives zero") {
    RealTimeTarget t(3, 1.0);
    for (int s = 0; s <= 20; ++s) t.append(0.1 * s, {2.0, -1.0, 0.5});
    CHECK(norm(t.velocity(1.7)) == 0.0);
  }
  SUBCASE("linear trace is exact") {
    RealTimeTarget t(3, 1.0);
    for (int s = 0; s <= 400; ++s) t.append(0.05 * s, {0.01 * 0.05 * s, 0.0, 0.0});
    const Vec v = t.velocity(10.0);
    CHECK(v[0] == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(std::abs(v[1]) < 1e-15);
  }
  SUBCASE("sinusoidal trace matches the analytic derivative at the window midpoint") {
    const double W = 0.05;
    RealTimeTarget t(3, W);
    const double dt = 0.001;
    for (int s = 0; s <= 5000; ++s)
      t.append(dt * s, {std::sin(dt * s), std::cos(2.0 * dt * s), 0.0});
    for (double at : {1.0, 2.3, 4.9}) {
      const Vec v = t.velocity(at);
      const double mid = at - W / 2.0;
      // backward difference == central difference about the midpoint: O(W^2)
      CHECK(std::abs(v[0] - std::cos(mid)) < 5.0 * W * W);
      CHECK(std::abs(v[1] + 2.0 * std::sin(2.0 * mid)) < 20.0 * W * W);
    }
  }
  SUBCASE("zero before the second sample and clamped outside the trace") {
    RealTimeTarget t(2, 0.5);
    t.append(0.0, {1.0, 0.0});
    CHECK(norm(t.velocity(0.0)) == 0.0);  // single sample
    t.append(1.0, {2.0, 0.0});
    CHECK(norm(t.velocity(0.5)) == 0.0);  // before the second sample
    CHECK(t.velocity(5.0)[0] == doctest::Approx(1.0));  // clamped to the trace end
    CHECK(t.position(-3.0)[0] == 1.0);
    CHECK(t.position(9.0)[0] == 2.0);
  }
  SUBCASE("samples must increase strictly") {
    RealTimeTarget t(2, 0.5);
    t.append(0.0, {0.0, 0.0});
    CHECK_THROWS_AS(t.append(0.0, {1.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("real-time phi matches parametric phi on a trace sampled from the curve") {
  // trace p(t) = f(w1(t)) with w1(t) = t on the sine path
  const ParametricCurve f = sine_path();
  auto target = std::make_shared<RealTimeTarget>(3, 0.2);
  for (int s = 0; s <= 2000; ++s) {
    const double t = 0.01 * s;
    target->append(t, f.point(t));
  }
  const ParametricCurve g = ParametricCurve::from_strings({"2*cos(w)", "2*sin(w)", "0"});
  CompositeManifold param(f, g);
  CompositeManifold realtime(target, g);
  SplitMix64 rng(99);
  for (int i = 0; i < 50; ++i) {
    const double t = rng.uniform(0.5, 19.5);
    Vec x{rng.uniform(-20, 20), rng.uniform(-10, 10), rng.uniform(-1, 1)};
    const double w2 = rng.uniform(0, 6.28);
    const Vec a = param.phi(x, t, w2);       // parametric f evaluated at w1 = t
    const Vec b = realtime.phi(x, t, w2, t); // trace evaluated at time t
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]) < 1e-4);
  }
}

TEST_CASE("assumption audit: scenario curves bounded, cubic over a huge window not") {
  const CurveAudit a = audit_curve(circle30(), -10.0, 200.0);
  CHECK(a.finite);
  CHECK(a.max_first == doctest::Approx(30.0).epsilon(1e-3));
  CHECK(a.max_second == doctest::Approx(30.0).epsilon(1e-3));
  CHECK(a.bounded_by(100.0));

  const ParametricCurve cubic = ParametricCurve::from_strings({"w^3"});
  const CurveAudit b = audit_curve(cubic, -1e3, 1e3);
  CHECK_FALSE(b.bounded_by(10.0));
}

TEST_CASE("curves of mismatched dimension are rejected") {
  CHECK_THROWS_AS(CompositeManifold(circle30(), ParametricCurve::from_strings({"w"})),
                  std::invalid_argument);
}
