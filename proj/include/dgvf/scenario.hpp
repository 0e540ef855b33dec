#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dgvf/engine.hpp"

namespace dgvf {

using njson = nlohmann::json;

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cfg {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

inline void require_object(const njson& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

inline void reject_unknown_keys(const njson& obj, const std::set<std::string>& allowed,
                                const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

inline double number(const njson& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline int integer(const njson& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline std::string text(const njson& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline Vec number_array(const njson& j, std::size_t size, const std::string& path) {
  if (!j.is_array() || j.size() != size)
    fail(path, "expected an array of " + std::to_string(size) + " numbers");
  Vec out(size);
  for (std::size_t i = 0; i < size; ++i) out[i] = number(j[i], path + "[" + std::to_string(i) + "]");
  return out;
}

// number (broadcast), explicit array, {"groups": [{"from","to","value"}]} with
// 1-based inclusive ranges, or {"spaced": {"start","step"}}.
inline std::vector<double> reference_config(const njson& j, int robots, const std::string& path) {
  std::vector<double> out(static_cast<std::size_t>(robots), 0.0);
  if (j.is_number()) {
    std::fill(out.begin(), out.end(), j.get<double>());
    return out;
  }
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != robots)
      fail(path, "expected " + std::to_string(robots) + " entries");
    for (int i = 0; i < robots; ++i) out[static_cast<std::size_t>(i)] = number(j[i], path);
    return out;
  }
  if (j.is_object()) {
    reject_unknown_keys(j, {"groups", "spaced"}, path);
    if (j.contains("groups")) {
      std::vector<char> covered(static_cast<std::size_t>(robots), 0);
      for (const njson& g : j.at("groups")) {
        require_object(g, path + ".groups[]");
        reject_unknown_keys(g, {"from", "to", "value"}, path + ".groups[]");
        const int from = integer(g.at("from"), path + ".groups[].from");
        const int to = integer(g.at("to"), path + ".groups[].to");
        const double v = number(g.at("value"), path + ".groups[].value");
        if (from < 1 || to > robots || from > to) fail(path + ".groups[]", "bad robot range");
        for (int i = from; i <= to; ++i) {
          out[static_cast<std::size_t>(i - 1)] = v;
          covered[static_cast<std::size_t>(i - 1)] = 1;
        }
      }
      for (int i = 0; i < robots; ++i)
        if (!covered[static_cast<std::size_t>(i)]) fail(path + ".groups", "robot " + std::to_string(i + 1) + " not covered");
      return out;
    }
    if (j.contains("spaced")) {
      const njson& s = j.at("spaced");
      require_object(s, path + ".spaced");
      reject_unknown_keys(s, {"start", "step"}, path + ".spaced");
      const double start = number(s.at("start"), path + ".spaced.start");
      const double step = number(s.at("step"), path + ".spaced.step");
      for (int i = 0; i < robots; ++i) out[static_cast<std::size_t>(i)] = start + step * i;
      return out;
    }
  }
  fail(path, "expected a number, array, or {groups|spaced} object");
}

inline Topology topology_config(const njson& j, int robots, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "ring") return Topology::ring(robots);
    if (s == "complete") return Topology::complete(robots);
    fail(path, "unknown topology shorthand '" + s + "'");
  }
  if (j.is_array()) {
    std::vector<std::pair<int, int>> edges;
    for (const njson& e : j) {
      if (!e.is_array() || e.size() != 2) fail(path, "edges must be [i, j] pairs");
      const int a = integer(e[0], path);
      const int b = integer(e[1], path);
      if (a < 1 || b < 1 || a > robots || b > robots) fail(path, "edge endpoint out of range (1-based)");
      edges.push_back({a - 1, b - 1});
    }
    try {
      return Topology(robots, std::move(edges));
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  }
  fail(path, "expected \"ring\", \"complete\", or a list of [i, j] pairs");
}

inline std::vector<Expr> expr_list(const njson& j, int n, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    fail(path, "expected an array of " + std::to_string(n) + " expression strings");
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) {
    const std::string s = text(j[c], path + "[" + std::to_string(c) + "]");
    try {
      out.push_back(parse_expr(s));
    } catch (const ParseError& e) {
      fail(path + "[" + std::to_string(c) + "]", std::string("bad expression: ") + e.what());
    }
  }
  return out;
}

}  // namespace cfg

// Builtin target-motion presets. Sampling is deterministic so identical specs
// reproduce identical traces.
inline std::shared_ptr<RealTimeTarget> build_target_trace(const njson& spec, int n, double duration,
                                                          const std::string& base_dir,
                                                          const std::string& path) {
  using namespace cfg;
  require_object(spec, path);
  reject_unknown_keys(spec,
                      {"preset", "file", "speed", "heading", "origin", "scale", "period", "rate_hz",
                       "window", "extra_time"},
                      path);
  const double window = spec.contains("window") ? number(spec.at("window"), path + ".window") : 0.2;
  auto target = std::make_shared<RealTimeTarget>(n, window);

  if (spec.contains("file")) {
    const std::string rel = text(spec.at("file"), path + ".file");
    const std::filesystem::path full = std::filesystem::path(base_dir) / rel;
    std::ifstream in(full);
    if (!in) fail(path + ".file", "cannot open trace file '" + full.string() + "'");
    std::string line;
    if (!std::getline(in, line)) fail(path + ".file", "empty trace file");
    std::string expect = "t";
    for (int j = 1; j <= n; ++j) expect += ",x" + std::to_string(j);
    if (line != expect) fail(path + ".file", "trace header must be '" + expect + "'");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string tok;
      std::vector<double> vals;
      while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
      if (static_cast<int>(vals.size()) != n + 1) fail(path + ".file", "bad trace row '" + line + "'");
      target->append(vals[0], Vec(vals.begin() + 1, vals.end()));
    }
    if (target->size() == 0) fail(path + ".file", "trace has no samples");
    return target;
  }

  const std::string preset = spec.contains("preset") ? text(spec.at("preset"), path + ".preset") : "line";
  const double rate = spec.contains("rate_hz") ? number(spec.at("rate_hz"), path + ".rate_hz") : 50.0;
  const double extra = spec.contains("extra_time") ? number(spec.at("extra_time"), path + ".extra_time") : 10.0;
  Vec origin(static_cast<std::size_t>(n), 0.0);
  if (spec.contains("origin")) origin = number_array(spec.at("origin"), static_cast<std::size_t>(n), path + ".origin");
  const double t_end = duration + extra;
  const int samples = static_cast<int>(std::ceil(t_end * rate)) + 1;

  if (preset == "line") {
    const double speed = spec.contains("speed") ? number(spec.at("speed"), path + ".speed") : 0.01;
    Vec heading(static_cast<std::size_t>(n), 0.0);
    heading[0] = 1.0;
    if (spec.contains("heading")) heading = number_array(spec.at("heading"), static_cast<std::size_t>(n), path + ".heading");
    const double hn = norm(heading);
    if (hn == 0.0) fail(path + ".heading", "zero heading");
    for (double& h : heading) h /= hn;
    for (int s = 0; s < samples; ++s) {
      const double t = s / rate;
      Vec p = origin;
      for (int j = 0; j < n; ++j) p[static_cast<std::size_t>(j)] += speed * t * heading[static_cast<std::size_t>(j)];
      target->append(t, std::move(p));
    }
    return target;
  }
  if (preset == "curve") {
    // slow figure: x = A sin(2 pi t / T), y = A/2 sin(4 pi t / T)
    const double scale = spec.contains("scale") ? number(spec.at("scale"), path + ".scale") : 0.25;
    const double period = spec.contains("period") ? number(spec.at("period"), path + ".period") : 120.0;
    for (int s = 0; s < samples; ++s) {
      const double t = s / rate;
      Vec p = origin;
      p[0] += scale * std::sin(2.0 * M_PI * t / period);
      if (n > 1) p[1] += 0.5 * scale * std::sin(4.0 * M_PI * t / period);
      target->append(t, std::move(p));
    }
    return target;
  }
  cfg::fail(path + ".preset", "unknown preset '" + preset + "' (expected line|curve)");
}

// ---------------------------------------------------------------------------
// Scenario loading
// ---------------------------------------------------------------------------

inline Scenario load_scenario_json(const njson& j, const std::string& base_dir = ".") {
  using namespace cfg;
  require_object(j, "scenario");
  reject_unknown_keys(j,
                      {"name", "n", "robots", "model", "dt", "duration", "seed", "metrics_stride",
                       "paths", "target", "topology", "w1_ref", "w2_ref", "gains", "speeds",
                       "k_theta", "saturation", "init", "check"},
                      "scenario");

  Scenario sc;
  sc.name = j.contains("name") ? text(j.at("name"), "name") : "unnamed";
  sc.n = j.contains("n") ? integer(j.at("n"), "n") : 3;
  if (sc.n < 1) fail("n", "ambient dimension must be positive");
  if (!j.contains("robots")) fail("robots", "missing robot count");
  sc.robot_count = integer(j.at("robots"), "robots");
  if (sc.robot_count < 1) fail("robots", "need at least one robot");

  const std::string model = j.contains("model") ? text(j.at("model"), "model") : "integrator";
  if (model == "integrator") sc.model = ModelKind::integrator;
  else if (model == "unicycle") sc.model = ModelKind::unicycle;
  else fail("model", "expected \"integrator\" or \"unicycle\"");
  if (sc.model == ModelKind::unicycle && sc.n != 3)
    fail("model", "the unicycle model drives exactly three spatial coordinates");

  sc.dt = j.contains("dt") ? number(j.at("dt"), "dt") : 0.01;
  if (!(sc.dt > 0.0)) fail("dt", "dt must be positive");
  sc.duration = j.contains("duration") ? number(j.at("duration"), "duration") : 60.0;
  if (sc.duration != 0.0 && sc.duration < sc.dt) fail("duration", "duration must be 0 or >= dt");
  if (j.contains("seed")) sc.seed = static_cast<std::uint64_t>(j.at("seed").get<std::uint64_t>());
  if (j.contains("metrics_stride")) {
    sc.metrics_stride = integer(j.at("metrics_stride"), "metrics_stride");
    if (sc.metrics_stride < 1) fail("metrics_stride", "stride must be >= 1");
  }

  // --- paths -------------------------------------------------------------
  if (!j.contains("paths")) fail("paths", "missing");
  const njson& paths = j.at("paths");
  require_object(paths, "paths");
  reject_unknown_keys(paths, {"f", "g", "g_offsets", "g_groups", "g_per_robot"}, "paths");

  const bool real_time = j.contains("target");
  ParametricCurve f_curve;
  if (real_time) {
    if (paths.contains("f")) fail("paths.f", "remove f when a target trace is configured");
    sc.target = build_target_trace(j.at("target"), sc.n, sc.duration, base_dir, "target");
    sc.target_spec_text = j.at("target").dump();
  } else {
    if (!paths.contains("f")) fail("paths.f", "missing interception curve");
    f_curve = ParametricCurve(expr_list(paths.at("f"), sc.n, "paths.f"));
  }

  std::vector<ParametricCurve> g_curves;
  const int shared_forms = (paths.contains("g") ? 1 : 0) + (paths.contains("g_offsets") ? 1 : 0) +
                           (paths.contains("g_groups") ? 1 : 0) + (paths.contains("g_per_robot") ? 1 : 0);
  if (shared_forms != 1) fail("paths", "exactly one of g, g_offsets, g_groups, g_per_robot required");
  if (paths.contains("g")) {
    ParametricCurve g(expr_list(paths.at("g"), sc.n, "paths.g"));
    g_curves.assign(static_cast<std::size_t>(sc.robot_count), g);
  } else if (paths.contains("g_offsets")) {
    const njson& offs = paths.at("g_offsets");
    if (!offs.is_array() || static_cast<int>(offs.size()) != sc.robot_count)
      fail("paths.g_offsets", "expected one offset vector per robot");
    for (int i = 0; i < sc.robot_count; ++i)
      g_curves.push_back(ParametricCurve::constant(
          number_array(offs[i], static_cast<std::size_t>(sc.n), "paths.g_offsets[" + std::to_string(i) + "]")));
  } else if (paths.contains("g_groups")) {
    g_curves.resize(static_cast<std::size_t>(sc.robot_count));
    std::vector<char> covered(static_cast<std::size_t>(sc.robot_count), 0);
    for (const njson& g : paths.at("g_groups")) {
      require_object(g, "paths.g_groups[]");
      reject_unknown_keys(g, {"from", "to", "components"}, "paths.g_groups[]");
      const int from = integer(g.at("from"), "paths.g_groups[].from");
      const int to = integer(g.at("to"), "paths.g_groups[].to");
      if (from < 1 || to > sc.robot_count || from > to) fail("paths.g_groups[]", "bad robot range");
      ParametricCurve curve(expr_list(g.at("components"), sc.n, "paths.g_groups[].components"));
      for (int i = from; i <= to; ++i) {
        g_curves[static_cast<std::size_t>(i - 1)] = curve;
        covered[static_cast<std::size_t>(i - 1)] = 1;
      }
    }
    for (int i = 0; i < sc.robot_count; ++i)
      if (!covered[static_cast<std::size_t>(i)])
        fail("paths.g_groups", "robot " + std::to_string(i + 1) + " not covered");
  } else {
    const njson& per = paths.at("g_per_robot");
    if (!per.is_array() || static_cast<int>(per.size()) != sc.robot_count)
      fail("paths.g_per_robot", "expected one component list per robot");
    for (int i = 0; i < sc.robot_count; ++i)
      g_curves.push_back(ParametricCurve(expr_list(per[i], sc.n, "paths.g_per_robot[" + std::to_string(i) + "]")));
  }

  sc.manifolds.reserve(static_cast<std::size_t>(sc.robot_count));
  for (int i = 0; i < sc.robot_count; ++i) {
    if (real_time)
      sc.manifolds.emplace_back(sc.target, std::move(g_curves[static_cast<std::size_t>(i)]));
    else
      sc.manifolds.emplace_back(f_curve, std::move(g_curves[static_cast<std::size_t>(i)]));
  }

  // --- coordination ---------------------------------------------------------
  sc.topology = j.contains("topology") ? topology_config(j.at("topology"), sc.robot_count, "topology")
                                       : Topology::ring(sc.robot_count);
  sc.offsets.w1_ref = j.contains("w1_ref") ? reference_config(j.at("w1_ref"), sc.robot_count, "w1_ref")
                                           : std::vector<double>(static_cast<std::size_t>(sc.robot_count), 0.0);
  sc.offsets.w2_ref = j.contains("w2_ref") ? reference_config(j.at("w2_ref"), sc.robot_count, "w2_ref")
                                           : std::vector<double>(static_cast<std::size_t>(sc.robot_count), 0.0);

  // --- gains / speeds / model parameters ------------------------------------
  sc.gains.k.assign(static_cast<std::size_t>(sc.n), 1.0);
  if (j.contains("gains")) {
    const njson& g = j.at("gains");
    require_object(g, "gains");
    reject_unknown_keys(g, {"k", "kc1", "kc2"}, "gains");
    if (g.contains("k")) {
      if (g.at("k").is_number())
        sc.gains.k.assign(static_cast<std::size_t>(sc.n), number(g.at("k"), "gains.k"));
      else
        sc.gains.k = number_array(g.at("k"), static_cast<std::size_t>(sc.n), "gains.k");
    }
    if (g.contains("kc1")) sc.gains.kc1 = number(g.at("kc1"), "gains.kc1");
    if (g.contains("kc2")) sc.gains.kc2 = number(g.at("kc2"), "gains.kc2");
  }
  try {
    sc.gains.validate();
  } catch (const std::exception& e) {
    fail("gains", e.what());
  }

  if (j.contains("speeds")) {
    const njson& s = j.at("speeds");
    require_object(s, "speeds");
    reject_unknown_keys(s, {"w1dot_star", "w2dot_star"}, "speeds");
    if (s.contains("w1dot_star")) sc.speeds.w1dot_star = number(s.at("w1dot_star"), "speeds.w1dot_star");
    if (s.contains("w2dot_star")) sc.speeds.w2dot_star = number(s.at("w2dot_star"), "speeds.w2dot_star");
  }

  if (j.contains("k_theta")) {
    sc.k_theta = number(j.at("k_theta"), "k_theta");
    if (!(sc.k_theta > 0.0)) fail("k_theta", "must be positive");
  }
  if (j.contains("saturation")) {
    const njson& s = j.at("saturation");
    require_object(s, "saturation");
    reject_unknown_keys(s, {"v", "uz", "utheta"}, "saturation");
    if (s.contains("v")) sc.saturation.v = number(s.at("v"), "saturation.v");
    if (s.contains("uz")) sc.saturation.uz = number(s.at("uz"), "saturation.uz");
    if (s.contains("utheta")) sc.saturation.utheta = number(s.at("utheta"), "saturation.utheta");
    for (auto lim : {sc.saturation.v, sc.saturation.uz, sc.saturation.utheta})
      if (lim && !(*lim > 0.0)) fail("saturation", "limits must be positive");
  }

  // --- initial-state sampler -------------------------------------------------
  sc.init.box_center.assign(static_cast<std::size_t>(sc.n), 0.0);
  sc.init.box_halfwidth.assign(static_cast<std::size_t>(sc.n), 1.0);
  if (j.contains("init")) {
    const njson& s = j.at("init");
    require_object(s, "init");
    reject_unknown_keys(s, {"box_center", "box_halfwidth", "w1", "w2", "w_relative"}, "init");
    if (s.contains("box_center"))
      sc.init.box_center = number_array(s.at("box_center"), static_cast<std::size_t>(sc.n), "init.box_center");
    if (s.contains("box_halfwidth")) {
      if (s.at("box_halfwidth").is_number())
        sc.init.box_halfwidth.assign(static_cast<std::size_t>(sc.n), number(s.at("box_halfwidth"), "init.box_halfwidth"));
      else
        sc.init.box_halfwidth = number_array(s.at("box_halfwidth"), static_cast<std::size_t>(sc.n), "init.box_halfwidth");
    }
    if (s.contains("w1")) {
      const Vec r = number_array(s.at("w1"), 2, "init.w1");
      sc.init.w1_lo = r[0];
      sc.init.w1_hi = r[1];
    }
    if (s.contains("w2")) {
      const Vec r = number_array(s.at("w2"), 2, "init.w2");
      sc.init.w2_lo = r[0];
      sc.init.w2_hi = r[1];
    }
    if (s.contains("w_relative")) {
      if (!s.at("w_relative").is_boolean()) fail("init.w_relative", "expected a boolean");
      sc.init.w_relative_to_ref = s.at("w_relative").get<bool>();
    }
    if (sc.init.w1_lo > sc.init.w1_hi || sc.init.w2_lo > sc.init.w2_hi) fail("init", "interval lo > hi");
    for (double h : sc.init.box_halfwidth)
      if (h < 0.0) fail("init.box_halfwidth", "must be non-negative");
  }

  if (j.contains("check")) {
    const njson& c = j.at("check");
    require_object(c, "check");
    reject_unknown_keys(c, {"max_phi", "max_coord_err", "speed_rel_tol"}, "check");
    if (c.contains("max_phi")) sc.check.max_phi = number(c.at("max_phi"), "check.max_phi");
    if (c.contains("max_coord_err")) sc.check.max_coord_err = number(c.at("max_coord_err"), "check.max_coord_err");
    if (c.contains("speed_rel_tol")) sc.check.speed_rel_tol = number(c.at("speed_rel_tol"), "check.speed_rel_tol");
  }

  if (!sc.topology.connected())
    sc.load_warnings.push_back("topology is not connected; coordination cannot reach consensus");

  return sc;
}

// ---------------------------------------------------------------------------
// Builtin scenarios. Gains, steps, initial boxes and topology are artifact
// defaults chosen for a stable fixed-step integration; the curves, reference
// configurations, robot counts and desired speeds follow the published
// scenario definitions.
// ---------------------------------------------------------------------------

namespace builtin {

// 82 constant enclosing offsets arranged as a rosette; stands in for the
// unpublished glyph displacement table.
inline njson rosette_offsets() {
  njson arr = njson::array();
  for (int i = 0; i < 82; ++i) {
    const double ang = 2.0 * M_PI * i / 82.0;
    const double r = 6.0 * (1.0 + 0.3 * std::cos(7.0 * ang));
    arr.push_back({r * std::cos(ang), r * std::sin(ang), 0.0});
  }
  return arr;
}

inline njson sim1_formation() {
  njson j;
  j["name"] = "sim1-formation";
  j["n"] = 3;
  j["robots"] = 82;
  j["model"] = "integrator";
  j["dt"] = 0.01;
  j["duration"] = 100.0;
  j["seed"] = 1;
  j["metrics_stride"] = 25;
  j["paths"]["f"] = {"w", "5*sin(pi*w/50)", "0"};
  j["paths"]["g_offsets"] = rosette_offsets();
  // the slow ring mode (mu_2 ~ 6e-3 at N = 82) cannot close the staggered
  // w1 groups within the run; the complete graph keeps mu = N
  j["topology"] = "complete";
  j["w1_ref"]["groups"] = {njson{{"from", 1}, {"to", 13}, {"value", 0.0}},
                           njson{{"from", 14}, {"to", 20}, {"value", 10.0}},
                           njson{{"from", 21}, {"to", 38}, {"value", 20.0}},
                           njson{{"from", 39}, {"to", 48}, {"value", 30.0}},
                           njson{{"from", 49}, {"to", 65}, {"value", 40.0}},
                           njson{{"from", 66}, {"to", 82}, {"value", 50.0}}};
  j["w2_ref"] = 0.0;
  j["gains"] = {{"k", 1.0}, {"kc1", 1.0}, {"kc2", 1.0}};
  j["speeds"] = {{"w1dot_star", 3.0}, {"w2dot_star", 0.0}};
  j["init"] = {{"box_center", {0.0, 0.0, 0.0}},
               {"box_halfwidth", 10.0},
               {"w1", {-1.0, 1.0}},
               {"w2", {-0.1, 0.1}},
               {"w_relative", true}};
  j["check"] = {{"max_phi", 1e-2}, {"max_coord_err", 1e-3}, {"speed_rel_tol", 0.01}};
  return j;
}

inline njson sim2_enclose() {
  njson j;
  j["name"] = "sim2-enclose";
  j["n"] = 3;
  j["robots"] = 10;
  j["model"] = "integrator";
  j["dt"] = 0.01;
  j["duration"] = 60.0;
  j["seed"] = 1;
  j["paths"]["f"] = {"30*cos(w)", "30*sin(w)", "0"};
  j["paths"]["g"] = {"10*sin(w)*atan(w)", "0", "10*cos(w)"};
  // the interception tangent is large (|f'| = 30), which slows the coupled
  // consensus mode to ~ kc*mu/(1+|f'|^2); a complete graph keeps mu = N
  j["topology"] = "complete";
  j["w1_ref"] = 0.0;
  j["w2_ref"]["spaced"] = {{"start", 2.0 * M_PI / 10.0}, {"step", 2.0 * M_PI / 10.0}};
  j["gains"] = {{"k", 0.16}, {"kc1", 15.0}, {"kc2", 15.0}};
  j["speeds"] = {{"w1dot_star", 3.0}, {"w2dot_star", 3.0}};
  j["init"] = {{"box_center", {30.0, 0.0, 0.0}},
               {"box_halfwidth", 10.0},
               {"w1", {-0.3, 0.3}},
               {"w2", {-1.0, 1.0}},
               {"w_relative", true}};
  j["check"] = {{"max_phi", 1e-2}, {"max_coord_err", 1e-3}, {"speed_rel_tol", 0.01}};
  return j;
}

inline njson sim3_circumnav() {
  njson j;
  j["name"] = "sim3-circumnav";
  j["n"] = 3;
  j["robots"] = 27;
  j["model"] = "unicycle";
  j["dt"] = 5e-4;
  j["duration"] = 30.0;
  j["seed"] = 1;
  j["metrics_stride"] = 50;
  j["paths"]["f"] = {"w", "0.01*w^2", "0"};
  j["paths"]["g_groups"] = {
      njson{{"from", 1},
            {"to", 9},
            {"components",
             {"8*(1+0.4*sin(2*w)+0.2*cos(3*w))*cos(w)", "8*(1+0.4*sin(2*w)+0.2*cos(3*w))*sin(w)", "0"}}},
      njson{{"from", 10}, {"to", 18}, {"components", {"28*cos(w)", "28*sin(w)", "0"}}},
      njson{{"from", 19},
            {"to", 27},
            {"components", {"20*(cos(w)+0.1*sin(3*w))", "20*(sin(w)+0.1*cos(3*w))", "0"}}}};
  j["topology"] = "complete";
  j["w1_ref"] = 0.0;
  j["w2_ref"]["spaced"] = {{"start", 0.0}, {"step", 6.0 * M_PI / 27.0}};
  j["gains"] = {{"k", 1.0}, {"kc1", 20.0}, {"kc2", 20.0}};
  j["speeds"] = {{"w1dot_star", 3.0}, {"w2dot_star", 2.0}};
  j["k_theta"] = 5000.0;
  // unsaturated transients can command hundreds of m/s before the heading
  // settles, which throws the three orbit families into a consensus tangle;
  // bounded inputs keep the approach phase inside the convergent regime
  j["saturation"] = {{"v", 80.0}, {"uz", 50.0}, {"utheta", 50.0}};
  j["init"] = {{"box_center", {0.0, 0.0, 0.0}},
               {"box_halfwidth", 10.0},
               {"w1", {-1.0, 1.0}},
               {"w2", {-0.3, 0.3}},
               {"w_relative", true}};
  // unicycles ride a heading-lag standoff cycle of a few centimeters, so the
  // supporting thresholds here are looser than the enclosing run's
  j["check"] = {{"max_phi", 5e-2}, {"max_coord_err", 5e-3}};
  return j;
}

// Nine-robot subset on the middle (circular) orbit family; sized so the
// acceptance run finishes quickly at full metrics resolution.
inline njson sim3_circumnav_desk() {
  njson j;
  j["name"] = "sim3-circumnav-desk";
  j["n"] = 3;
  j["robots"] = 9;
  j["model"] = "unicycle";
  j["dt"] = 5e-4;
  j["duration"] = 60.0;
  j["seed"] = 1;
  j["paths"]["f"] = {"w", "0.01*w^2", "0"};
  j["paths"]["g"] = {"28*cos(w)", "28*sin(w)", "0"};
  j["topology"] = "complete";
  j["w1_ref"] = 0.0;
  j["w2_ref"]["spaced"] = {{"start", 2.0 * M_PI}, {"step", 6.0 * M_PI / 27.0}};
  j["gains"] = {{"k", 1.0}, {"kc1", 60.0}, {"kc2", 60.0}};
  j["speeds"] = {{"w1dot_star", 3.0}, {"w2dot_star", 2.0}};
  j["k_theta"] = 5000.0;
  j["saturation"] = {{"v", 80.0}, {"uz", 50.0}, {"utheta", 50.0}};
  j["init"] = {{"box_center", {0.0, 0.0, 0.0}},
               {"box_halfwidth", 10.0},
               {"w1", {-1.0, 1.0}},
               {"w2", {-0.3, 0.3}},
               {"w_relative", true}};
  j["check"] = {{"max_phi", 5e-2}, {"max_coord_err", 2e-3}, {"speed_rel_tol", 0.01}};
  return j;
}

inline njson exp1_circle() {
  njson j;
  j["name"] = "exp1-circle";
  j["n"] = 3;
  j["robots"] = 5;
  j["model"] = "unicycle";
  j["dt"] = 0.01;
  j["duration"] = 60.0;
  j["seed"] = 1;
  j["target"] = {{"preset", "line"}, {"speed", 0.01}, {"heading", {1.0, 0.0, 0.0}},
                 {"origin", {0.0, 0.0, 0.0}}, {"window", 0.2}, {"rate_hz", 50.0}};
  j["paths"]["g"] = {"0.24*cos(w)", "0.24*sin(w)", "0"};
  j["topology"] = "ring";
  j["w1_ref"] = 0.0;
  j["w2_ref"]["spaced"] = {{"start", 0.0}, {"step", 2.0 * M_PI / 5.0}};
  // w1dot feeds the estimated target velocity forward; the trace itself is
  // not parameterized by w1.
  j["speeds"] = {{"w1dot_star", 1.0}, {"w2dot_star", 0.02}};
  j["gains"] = {{"k", 1.0}, {"kc1", 1.0}, {"kc2", 1.0}};
  j["k_theta"] = 2.0;
  j["saturation"] = {{"v", 0.2}, {"uz", 0.1}, {"utheta", 3.14}};
  j["init"] = {{"box_center", {0.0, 0.0, 0.0}},
               {"box_halfwidth", 0.5},
               {"w1", {0.0, 0.0}},
               {"w2", {-0.2, 0.2}},
               {"w_relative", true}};
  j["check"] = {{"max_phi", 1e-2}, {"max_coord_err", 1e-3}};
  return j;
}

inline njson exp2_star() {
  njson j = exp1_circle();
  j["name"] = "exp2-star";
  j["target"] = {{"preset", "curve"}, {"scale", 0.25}, {"period", 120.0},
                 {"origin", {0.0, 0.0, 0.0}}, {"window", 0.2}, {"rate_hz", 50.0}};
  j["paths"]["g"] = {"0.24*(cos(w)+0.2*sin(4*w))", "0.24*(sin(w)+0.2*cos(4*w))", "0"};
  return j;
}

}  // namespace builtin

inline std::vector<std::string> builtin_scenario_names() {
  return {"sim1-formation", "sim2-enclose", "sim3-circumnav", "sim3-circumnav-desk",
          "exp1-circle", "exp2-star"};
}

inline bool is_builtin_scenario(const std::string& name) {
  for (const std::string& s : builtin_scenario_names())
    if (s == name) return true;
  return false;
}

inline njson builtin_scenario_json(const std::string& name) {
  if (name == "sim1-formation") return builtin::sim1_formation();
  if (name == "sim2-enclose") return builtin::sim2_enclose();
  if (name == "sim3-circumnav") return builtin::sim3_circumnav();
  if (name == "sim3-circumnav-desk") return builtin::sim3_circumnav_desk();
  if (name == "exp1-circle") return builtin::exp1_circle();
  if (name == "exp2-star") return builtin::exp2_star();
  throw ScenarioError("unknown builtin scenario '" + name + "'");
}

// Load by builtin name or by file path.
inline Scenario load_scenario(const std::string& name_or_path) {
  if (is_builtin_scenario(name_or_path)) return load_scenario_json(builtin_scenario_json(name_or_path));
  std::ifstream in(name_or_path);
  if (!in) throw ScenarioError("cannot open scenario '" + name_or_path + "'");
  njson j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ScenarioError(name_or_path + ": JSON parse error: " + e.what());
  }
  return load_scenario_json(j, std::filesystem::path(name_or_path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Scenario dump: emits a normalized document that load_scenario_json accepts
// and resolves to an equivalent scenario. Expression components are printed
// in canonical form.
// ---------------------------------------------------------------------------

inline njson dump_scenario(const Scenario& sc, const njson* target_spec = nullptr) {
  njson j;
  j["name"] = sc.name;
  j["n"] = sc.n;
  j["robots"] = sc.robot_count;
  j["model"] = sc.model == ModelKind::integrator ? "integrator" : "unicycle";
  j["dt"] = sc.dt;
  j["duration"] = sc.duration;
  j["seed"] = sc.seed;
  if (sc.metrics_stride != 1) j["metrics_stride"] = sc.metrics_stride;

  auto curve_strings = [](const ParametricCurve& c) {
    njson arr = njson::array();
    for (const Expr& e : c.components()) arr.push_back(e.to_string());
    return arr;
  };
  if (sc.target) {
    if (target_spec) j["target"] = *target_spec;
    else if (!sc.target_spec_text.empty()) j["target"] = njson::parse(sc.target_spec_text);
  } else {
    j["paths"]["f"] = curve_strings(sc.manifolds.front().f());
  }
  bool g_shared = true;
  for (const CompositeManifold& m : sc.manifolds) {
    for (int c = 0; c < sc.n; ++c)
      if (!m.g().components()[static_cast<std::size_t>(c)].structurally_equal(
              sc.manifolds.front().g().components()[static_cast<std::size_t>(c)]))
        g_shared = false;
  }
  if (g_shared) {
    j["paths"]["g"] = curve_strings(sc.manifolds.front().g());
  } else {
    njson per = njson::array();
    for (const CompositeManifold& m : sc.manifolds) per.push_back(curve_strings(m.g()));
    j["paths"]["g_per_robot"] = per;
  }

  njson edges = njson::array();
  for (auto [a, b] : sc.topology.edges()) edges.push_back({a + 1, b + 1});
  j["topology"] = edges;
  j["w1_ref"] = sc.offsets.w1_ref;
  j["w2_ref"] = sc.offsets.w2_ref;
  j["gains"] = {{"k", sc.gains.k}, {"kc1", sc.gains.kc1}, {"kc2", sc.gains.kc2}};
  j["speeds"] = {{"w1dot_star", sc.speeds.w1dot_star}, {"w2dot_star", sc.speeds.w2dot_star}};
  j["k_theta"] = sc.k_theta;
  if (sc.saturation.any()) {
    njson s = njson::object();
    if (sc.saturation.v) s["v"] = *sc.saturation.v;
    if (sc.saturation.uz) s["uz"] = *sc.saturation.uz;
    if (sc.saturation.utheta) s["utheta"] = *sc.saturation.utheta;
    j["saturation"] = s;
  }
  j["init"] = {{"box_center", sc.init.box_center},
               {"box_halfwidth", sc.init.box_halfwidth},
               {"w1", {sc.init.w1_lo, sc.init.w1_hi}},
               {"w2", {sc.init.w2_lo, sc.init.w2_hi}},
               {"w_relative", sc.init.w_relative_to_ref}};
  njson c = njson::object();
  c["max_phi"] = sc.check.max_phi;
  c["max_coord_err"] = sc.check.max_coord_err;
  if (sc.check.speed_rel_tol) c["speed_rel_tol"] = *sc.check.speed_rel_tol;
  j["check"] = c;
  return j;
}

// ---------------------------------------------------------------------------
// Assumption audit: communication graph connectivity plus sampled bounds on
// the curve derivatives over the parameter range the run will visit.
// ---------------------------------------------------------------------------

struct CurveBoundsReport {
  std::string label;
  double w_lo = 0.0, w_hi = 0.0;
  CurveAudit audit;
};

struct ValidationReport {
  bool connected = false;
  double bound = 0.0;
  std::vector<CurveBoundsReport> curves;

  bool curves_bounded() const {
    for (const CurveBoundsReport& c : curves)
      if (!c.audit.bounded_by(bound)) return false;
    return true;
  }
  bool ok() const { return connected && curves_bounded(); }
};

inline std::pair<double, double> parameter_window(const Scenario& sc, bool for_w1) {
  const std::vector<double>& refs = for_w1 ? sc.offsets.w1_ref : sc.offsets.w2_ref;
  const double lo_off = for_w1 ? sc.init.w1_lo : sc.init.w2_lo;
  const double hi_off = for_w1 ? sc.init.w1_hi : sc.init.w2_hi;
  double lo, hi;
  if (sc.init.w_relative_to_ref) {
    lo = *std::min_element(refs.begin(), refs.end()) + lo_off;
    hi = *std::max_element(refs.begin(), refs.end()) + hi_off;
  } else {
    lo = lo_off;
    hi = hi_off;
  }
  const double travel = std::abs(for_w1 ? sc.speeds.w1dot_star : sc.speeds.w2dot_star) * sc.duration;
  const double slack = 0.25 * (travel + (hi - lo)) + 1.0;
  return {lo - travel - slack, hi + travel + slack};
}

inline ValidationReport validate_scenario(const Scenario& sc, double bound = 1e4,
                                          std::optional<std::pair<double, double>> window_override = {},
                                          int samples = 2048) {
  ValidationReport rep;
  rep.bound = bound;
  rep.connected = sc.topology.connected();

  const auto w1_window = window_override ? *window_override : parameter_window(sc, true);
  const auto w2_window = window_override ? *window_override : parameter_window(sc, false);

  auto curve_key = [](const ParametricCurve& c) {
    std::string k;
    for (const Expr& e : c.components()) k += e.to_string() + ";";
    return k;
  };

  if (!sc.target) {
    CurveBoundsReport r;
    r.label = "f";
    r.w_lo = w1_window.first;
    r.w_hi = w1_window.second;
    r.audit = audit_curve(sc.manifolds.front().f(), r.w_lo, r.w_hi, samples);
    rep.curves.push_back(std::move(r));
  }
  std::map<std::string, std::pair<int, int>> groups;  // key -> [first, last] robot (1-based)
  std::map<std::string, const ParametricCurve*> curves;
  for (int i = 0; i < sc.robot_count; ++i) {
    const ParametricCurve& g = sc.manifolds[static_cast<std::size_t>(i)].g();
    const std::string key = curve_key(g);
    auto it = groups.find(key);
    if (it == groups.end()) {
      groups[key] = {i + 1, i + 1};
      curves[key] = &g;
    } else {
      it->second.second = i + 1;
    }
  }
  for (const auto& [key, range] : groups) {
    CurveBoundsReport r;
    r.label = range.first == range.second
                  ? "g[robot " + std::to_string(range.first) + "]"
                  : "g[robots " + std::to_string(range.first) + "-" + std::to_string(range.second) + "]";
    r.w_lo = w2_window.first;
    r.w_hi = w2_window.second;
    r.audit = audit_curve(*curves[key], r.w_lo, r.w_hi, samples);
    rep.curves.push_back(std::move(r));
  }
  return rep;
}

}  // namespace dgvf
