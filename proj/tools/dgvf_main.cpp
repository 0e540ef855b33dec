// Command-line front end: load a scenario (builtin or JSON file), run the
// simulation and emit logs, or audit a scenario's assumptions.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dgvf/io.hpp"
#include "dgvf/scenario.hpp"

namespace {

using namespace dgvf;

struct CheckOutcome {
  bool ok = true;
  std::vector<std::string> lines;

  void add(bool pass, const std::string& what) {
    ok = ok && pass;
    lines.push_back(std::string(pass ? "PASS " : "FAIL ") + what);
  }
};

CheckOutcome evaluate_checks(const Scenario& sc, const RunSummary& s) {
  CheckOutcome out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "final max |phi| = %.3e (threshold %.1e)", s.final_max_phi_norm,
                sc.check.max_phi);
  out.add(s.final_max_phi_norm < sc.check.max_phi, buf);
  std::snprintf(buf, sizeof(buf), "max coordination error over last 10%% = %.3e (threshold %.1e)",
                s.max_coord_err_last10, sc.check.max_coord_err);
  out.add(s.max_coord_err_last10 < sc.check.max_coord_err, buf);
  if (sc.check.speed_rel_tol) {
    const double tol1 = *sc.check.speed_rel_tol *
                        (sc.speeds.w1dot_star != 0.0 ? std::abs(sc.speeds.w1dot_star) : 1.0);
    const double tol2 = *sc.check.speed_rel_tol *
                        (sc.speeds.w2dot_star != 0.0 ? std::abs(sc.speeds.w2dot_star) : 1.0);
    std::snprintf(buf, sizeof(buf), "max |w1dot - %g| over last 10%% = %.3e (threshold %.1e)",
                  sc.speeds.w1dot_star, s.max_w1dot_err_last10, tol1);
    out.add(s.max_w1dot_err_last10 < tol1, buf);
    std::snprintf(buf, sizeof(buf), "max |w2dot - %g| over last 10%% = %.3e (threshold %.1e)",
                  sc.speeds.w2dot_star, s.max_w2dot_err_last10, tol2);
    out.add(s.max_w2dot_err_last10 < tol2, buf);
  }
  return out;
}

int cmd_run(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
            std::optional<double> dt, std::optional<double> duration, const std::string& out_dir,
            bool check) {
  Scenario sc = load_scenario(scenario_arg);
  for (const std::string& w : sc.load_warnings) std::cerr << "warning: " << w << "\n";
  if (seed) sc.seed = *seed;
  if (dt) {
    if (!(*dt > 0.0)) {
      std::cerr << "error: dt must be positive\n";
      return 2;
    }
    sc.dt = *dt;
  }
  if (duration) {
    if (*duration < 0.0) {
      std::cerr << "error: duration must be non-negative\n";
      return 2;
    }
    sc.duration = *duration;
  }

  if (log_level() >= 1)
    std::cerr << "running '" << sc.name << "': " << sc.robot_count << " robots, " << sc.steps()
              << " steps at dt = " << sc.dt << "\n";
  RunResult res = run(sc, sc.seed);

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
  write_trajectory_csv(path("trajectory.csv"), sc, res.trajectory);
  write_metrics_csv(path("metrics.csv"), sc, res.metrics);
  write_summary_json(path("summary.json"), sc, res.summary);

  std::printf("final_max_phi_norm    %.6e\n", res.summary.final_max_phi_norm);
  std::printf("final_max_coord_err   %.6e\n", res.summary.final_max_coord_err);
  std::printf("mean_wdot_err_last10  %.6e\n", res.summary.mean_wdot_err_last10);
  if (log_level() >= 1)
    std::cerr << "wrote " << out_dir << "/{trajectory.csv,metrics.csv,summary.json} in "
              << res.summary.wall_seconds << " s\n";

  if (check) {
    CheckOutcome outcome = evaluate_checks(sc, res.summary);
    for (const std::string& line : outcome.lines) std::printf("%s\n", line.c_str());
    return outcome.ok ? 0 : 1;
  }
  return 0;
}

int cmd_validate(const std::string& scenario_arg, double bound,
                 std::optional<std::pair<double, double>> window) {
  Scenario sc = load_scenario(scenario_arg);
  ValidationReport rep = validate_scenario(sc, bound, window);
  std::printf("scenario '%s': %d robots, %zu edges\n", sc.name.c_str(), sc.robot_count,
              sc.topology.edges().size());
  std::printf("connectivity: %s\n", rep.connected ? "connected" : "NOT connected");
  for (const CurveBoundsReport& c : rep.curves) {
    const bool ok = c.audit.bounded_by(rep.bound);
    std::printf("%-22s window [%.6g, %.6g]  max|c'| = %.6g  max|c''| = %.6g  %s\n", c.label.c_str(),
                c.w_lo, c.w_hi, c.audit.max_first, c.audit.max_second,
                ok ? "bounded" : (c.audit.finite ? "EXCEEDS BOUND" : "NON-FINITE"));
  }
  std::printf("derivative bound %.6g: %s\n", rep.bound, rep.curves_bounded() ? "satisfied" : "violated");
  return rep.ok() ? 0 : 1;
}

int cmd_scenarios(const std::string& dump_name, const std::string& out_file) {
  if (!dump_name.empty()) {
    const njson j = builtin_scenario_json(dump_name);
    const std::string text = j.dump(2) + "\n";
    if (out_file.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      std::ofstream f(out_file);
      if (!f) {
        std::cerr << "error: cannot write '" << out_file << "'\n";
        return 2;
      }
      f << text;
    }
    return 0;
  }
  for (const std::string& name : builtin_scenario_names()) {
    const Scenario sc = load_scenario(name);
    std::printf("%-22s %3d robots  %-10s dt=%-7g duration=%gs\n", name.c_str(), sc.robot_count,
                sc.model == ModelKind::integrator ? "integrator" : "unicycle", sc.dt, sc.duration);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed guiding-vector-field multi-robot maneuvering simulator"};
  app.require_subcommand(1);

  std::string scenario_arg, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, duration;
  bool check = false;

  CLI::App* run_cmd = app.add_subcommand("run", "simulate a scenario and write logs");
  run_cmd->add_option("--scenario", scenario_arg, "builtin name or scenario file path")->required();
  run_cmd->add_option("--seed", seed, "override the scenario seed");
  run_cmd->add_option("--dt", dt, "override the step size [s]");
  run_cmd->add_option("--duration", duration, "override the run length [s]");
  run_cmd->add_option("--out", out_dir, "output directory (default: out)");
  run_cmd->add_flag("--check", check, "evaluate the scenario's convergence thresholds");

  double bound = 1e4;
  std::vector<double> window_flag;
  CLI::App* val_cmd = app.add_subcommand("validate", "audit connectivity and derivative bounds");
  val_cmd->add_option("--scenario", scenario_arg, "builtin name or scenario file path")->required();
  val_cmd->add_option("--bound", bound, "derivative bound (default 1e4)");
  val_cmd->add_option("--window", window_flag, "explicit parameter window lo hi")->expected(2);

  std::string dump_name, dump_out;
  CLI::App* list_cmd = app.add_subcommand("scenarios", "list builtin scenarios");
  list_cmd->add_option("--dump", dump_name, "print a builtin scenario as a JSON config");
  list_cmd->add_option("--out", dump_out, "write the dumped config to a file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed())
      return cmd_run(scenario_arg, seed, dt, duration, out_dir, check);
    if (val_cmd->parsed()) {
      std::optional<std::pair<double, double>> window;
      if (window_flag.size() == 2) window = {window_flag[0], window_flag[1]};
      return cmd_validate(scenario_arg, bound, window);
    }
    if (list_cmd->parsed()) return cmd_scenarios(dump_name, dump_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
