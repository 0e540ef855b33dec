#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dgvf/scenario.hpp"
#include "oracles.hpp"

using namespace dgvf;

namespace {

// canonical printed form: insensitive to constant-vs-negated-constant
// node shapes that mean the same thing
bool curves_equal(const ParametricCurve& a, const ParametricCurve& b) {
  if (a.dim() != b.dim()) return false;
  for (int c = 0; c < a.dim(); ++c)
    if (a.components()[static_cast<std::size_t>(c)].to_string() !=
        b.components()[static_cast<std::size_t>(c)].to_string())
      return false;
  return true;
}

bool scenarios_equivalent(const Scenario& a, const Scenario& b) {
  if (a.n != b.n || a.robot_count != b.robot_count || a.model != b.model) return false;
  if (a.dt != b.dt || a.duration != b.duration || a.seed != b.seed) return false;
  if (a.k_theta != b.k_theta || a.metrics_stride != b.metrics_stride) return false;
  if (a.gains.k != b.gains.k || a.gains.kc1 != b.gains.kc1 || a.gains.kc2 != b.gains.kc2) return false;
  if (a.speeds.w1dot_star != b.speeds.w1dot_star || a.speeds.w2dot_star != b.speeds.w2dot_star) return false;
  if (a.offsets.w1_ref != b.offsets.w1_ref || a.offsets.w2_ref != b.offsets.w2_ref) return false;
  if (a.topology.edges() != b.topology.edges()) return false;
  if (a.saturation.v != b.saturation.v || a.saturation.uz != b.saturation.uz ||
      a.saturation.utheta != b.saturation.utheta)
    return false;
  if (a.init.box_center != b.init.box_center || a.init.box_halfwidth != b.init.box_halfwidth ||
      a.init.w1_lo != b.init.w1_lo || a.init.w1_hi != b.init.w1_hi || a.init.w2_lo != b.init.w2_lo ||
      a.init.w2_hi != b.init.w2_hi || a.init.w_relative_to_ref != b.init.w_relative_to_ref)
    return false;
  if ((a.target == nullptr) != (b.target == nullptr)) return false;
  for (int i = 0; i < a.robot_count; ++i) {
    const CompositeManifold& ma = a.manifolds[static_cast<std::size_t>(i)];
    const CompositeManifold& mb = b.manifolds[static_cast<std::size_t>(i)];
    if (!curves_equal(ma.g(), mb.g())) return false;
    if (!a.target && !curves_equal(ma.f(), mb.f())) return false;
  }
  if (a.target) {
    if (a.target->size() != b.target->size()) return false;
    for (double t : {0.0, 1.0, 5.0, 30.0})
      if (norm(a.target->position(t) - b.target->position(t)) != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("every builtin scenario loads and carries a connected topology") {
  for (const std::string& name : builtin_scenario_names()) {
    const Scenario sc = load_scenario(name);
    CHECK(sc.name == name);
    CHECK(sc.topology.connected());
    CHECK(sc.load_warnings.empty());
    CHECK(static_cast<int>(sc.manifolds.size()) == sc.robot_count);
  }
}

TEST_CASE("sim2-enclose resolves the published constants") {
  const Scenario sc = load_scenario("sim2-enclose");
  CHECK(sc.robot_count == 10);
  CHECK(sc.model == ModelKind::integrator);
  CHECK(sc.speeds.w1dot_star == 3.0);
  CHECK(sc.speeds.w2dot_star == 3.0);
  const ParametricCurve& g = sc.manifolds[0].g();
  CHECK(g.components()[2].structurally_equal(parse_expr("10*cos(w)")));
  CHECK(g.components()[0].structurally_equal(parse_expr("10*sin(w)*atan(w)")));
  // evenly spaced enclosing phases ending at 2 pi
  CHECK(sc.offsets.w2_ref[9] == doctest::Approx(2.0 * M_PI).epsilon(1e-15));
  CHECK(sc.offsets.w2_ref[1] - sc.offsets.w2_ref[0] == doctest::Approx(2.0 * M_PI / 10).epsilon(1e-15));
}

TEST_CASE("sim1-formation carries the staggered w1 groups") {
  const Scenario sc = load_scenario("sim1-formation");
  CHECK(sc.robot_count == 82);
  CHECK(sc.offsets.w1_ref[0] == 0.0);
  CHECK(sc.offsets.w1_ref[12] == 0.0);
  CHECK(sc.offsets.w1_ref[13] == 10.0);
  CHECK(sc.offsets.w1_ref[20] == 20.0);
  CHECK(sc.offsets.w1_ref[38] == 30.0);
  CHECK(sc.offsets.w1_ref[48] == 40.0);
  CHECK(sc.offsets.w1_ref[65] == 50.0);
  CHECK(sc.offsets.w1_ref[81] == 50.0);
  // enclosing offsets are constant curves
  CHECK(norm(sc.manifolds[0].g().tangent(3.0)) == 0.0);
}

TEST_CASE("sim3-circumnav splits robots across the three orbit families") {
  const Scenario sc = load_scenario("sim3-circumnav");
  CHECK(sc.robot_count == 27);
  CHECK(sc.model == ModelKind::unicycle);
  CHECK(curves_equal(sc.manifolds[0].g(), sc.manifolds[8].g()));
  CHECK_FALSE(curves_equal(sc.manifolds[8].g(), sc.manifolds[9].g()));
  CHECK(curves_equal(sc.manifolds[9].g(), sc.manifolds[17].g()));
  CHECK_FALSE(curves_equal(sc.manifolds[17].g(), sc.manifolds[18].g()));
  CHECK(sc.manifolds[9].g().components()[0].structurally_equal(parse_expr("28*cos(w)")));
  CHECK(sc.offsets.w2_ref[1] - sc.offsets.w2_ref[0] ==
        doctest::Approx(6.0 * M_PI / 27.0).epsilon(1e-15));
  CHECK(sc.speeds.w2dot_star == 2.0);
}

TEST_CASE("experiment scenarios run in real-time-target mode") {
  for (const char* name : {"exp1-circle", "exp2-star"}) {
    const Scenario sc = load_scenario(name);
    CHECK(sc.robot_count == 5);
    CHECK(sc.target != nullptr);
    CHECK(sc.manifolds[0].real_time());
    CHECK(sc.speeds.w2dot_star == doctest::Approx(0.02));
    CHECK(sc.target->t_end() >= sc.duration);
    CHECK(sc.saturation.any());
  }
  const Scenario star = load_scenario("exp2-star");
  CHECK(star.manifolds[0].g().components()[0].structurally_equal(
      parse_expr("0.24*(cos(w)+0.2*sin(4*w))")));
}

TEST_CASE("builtin scenarios round-trip through dump and reload") {
  for (const std::string& name : builtin_scenario_names()) {
    const Scenario sc = load_scenario(name);
    const njson dumped = dump_scenario(sc);
    const Scenario back = load_scenario_json(dumped);
    CHECK(scenarios_equivalent(sc, back));
  }
}

TEST_CASE("file round trip through a temp config") {
  const auto dir = std::filesystem::temp_directory_path() / "dgvf_scenario_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "roundtrip.json";
  {
    std::ofstream out(file);
    out << dump_scenario(load_scenario("sim2-enclose")).dump(2);
  }
  const Scenario back = load_scenario(file.string());
  CHECK(scenarios_equivalent(back, load_scenario("sim2-enclose")));
  std::filesystem::remove_all(dir);
}

TEST_CASE("config rejection: bad gains, unknown keys, missing pieces") {
  njson base = builtin_scenario_json("sim2-enclose");

  SUBCASE("negative attraction gain") {
    base["gains"]["k"] = -1.0;
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("unknown top-level key") {
    base["unexpected"] = 1;
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("unknown nested key") {
    base["gains"]["kq"] = 1.0;
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("missing robots") {
    base.erase("robots");
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("wrong component count") {
    base["paths"]["f"] = {"w", "w"};
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("malformed expression points at the key") {
    base["paths"]["f"] = {"30*cos(w", "30*sin(w)", "0"};
    try {
      load_scenario_json(base);
      FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find("paths.f[0]") != std::string::npos);
    }
  }
  SUBCASE("bad dt / duration") {
    base["dt"] = 0.0;
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("reference config length mismatch") {
    base["w1_ref"] = {1.0, 2.0};
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
  SUBCASE("topology edge out of range") {
    base["topology"] = njson::array({njson::array({1, 11})});
    CHECK_THROWS_AS(load_scenario_json(base), ScenarioError);
  }
}

TEST_CASE("missing scenario file errors cleanly") {
  CHECK_THROWS_AS(load_scenario("does-not-exist.toml"), ScenarioError);
}

TEST_CASE("disconnected topology is a warning, not an error") {
  njson j = builtin_scenario_json("sim2-enclose");
  // ring of 10 with two opposite edges removed: two chains
  njson edges = njson::array();
  for (int i = 1; i <= 9; ++i)
    if (i != 5) edges.push_back({i, i + 1});
  j["topology"] = edges;
  const Scenario sc = load_scenario_json(j);
  CHECK_FALSE(sc.topology.connected());
  REQUIRE(sc.load_warnings.size() == 1);
}

TEST_CASE("target trace file loading and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "dgvf_trace_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv");
    out << "t,x1,x2,x3\n";
    for (int s = 0; s <= 100; ++s) out << 0.5 * s << "," << 0.01 * 0.5 * s << ",0,0\n";
  }
  njson j = builtin_scenario_json("exp1-circle");
  j["target"] = njson{{"file", "trace.csv"}, {"window", 0.5}};
  const Scenario sc = load_scenario_json(j, dir.string());
  REQUIRE(sc.target != nullptr);
  CHECK(sc.target->position(10.0)[0] == doctest::Approx(0.1));
  CHECK(sc.target->velocity(20.0)[0] == doctest::Approx(0.01));

  j["target"] = njson{{"file", "missing.csv"}};
  CHECK_THROWS_AS(load_scenario_json(j, dir.string()), ScenarioError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("assumption audit: builtins pass, cubic curve over a huge window fails") {
  for (const char* name : {"sim2-enclose", "sim3-circumnav", "sim1-formation"}) {
    const ValidationReport rep = validate_scenario(load_scenario(name));
    CHECK(rep.connected);
    CHECK(rep.curves_bounded());
    CHECK(rep.ok());
  }

  njson j = builtin_scenario_json("sim2-enclose");
  j["paths"]["g"] = {"w^3", "0", "0"};
  const Scenario cubic = load_scenario_json(j);
  const ValidationReport rep = validate_scenario(cubic, 10.0, std::pair{-1e3, 1e3});
  CHECK_FALSE(rep.curves_bounded());
  CHECK_FALSE(rep.ok());

  // disconnected variant fails the connectivity side
  njson dj = builtin_scenario_json("sim2-enclose");
  njson edges = njson::array();
  for (int i = 1; i <= 4; ++i) edges.push_back({i, i + 1});
  for (int i = 6; i <= 9; ++i) edges.push_back({i, i + 1});
  dj["topology"] = edges;
  const ValidationReport drep = validate_scenario(load_scenario_json(dj));
  CHECK_FALSE(drep.connected);
  CHECK_FALSE(drep.ok());
}

TEST_CASE("parameter window covers the reachable range of the run") {
  const Scenario sc = load_scenario("sim2-enclose");
  const auto [lo, hi] = parameter_window(sc, true);
  CHECK(lo < 0.0);
  CHECK(hi > sc.speeds.w1dot_star * sc.duration);  // init range plus travel
}
