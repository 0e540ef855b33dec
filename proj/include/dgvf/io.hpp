#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dgvf/engine.hpp"

namespace dgvf {

// Verbosity from the GVF_LOG environment variable: unset/"quiet" = 0,
// "info" = 1, "debug" = 2.
inline int log_level() {
  static const int level = [] {
    const char* v = std::getenv("GVF_LOG");
    if (!v) return 0;
    if (std::strcmp(v, "debug") == 0 || std::strcmp(v, "2") == 0) return 2;
    if (std::strcmp(v, "info") == 0 || std::strcmp(v, "1") == 0) return 1;
    return 0;
  }();
  return level;
}

namespace detail {

class CsvFile {
 public:
  explicit CsvFile(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
    if (!f_) throw std::runtime_error("cannot open '" + path + "' for writing");
    buf_.reserve(1 << 20);
  }
  ~CsvFile() {
    flush();
    if (f_) std::fclose(f_);
  }
  CsvFile(const CsvFile&) = delete;
  CsvFile& operator=(const CsvFile&) = delete;

  void raw(const char* s) { buf_.append(s); maybe_flush(); }
  void number(double v) {
    char tmp[40];
    std::snprintf(tmp, sizeof(tmp), "%.17g", v);
    buf_.append(tmp);
  }
  void integer(long long v) {
    char tmp[24];
    std::snprintf(tmp, sizeof(tmp), "%lld", v);
    buf_.append(tmp);
  }
  void comma() { buf_.push_back(','); }
  void endl() { buf_.push_back('\n'); maybe_flush(); }

 private:
  void maybe_flush() {
    if (buf_.size() > (1u << 20) - 256) flush();
  }
  void flush() {
    if (f_ && !buf_.empty()) {
      std::fwrite(buf_.data(), 1, buf_.size(), f_);
      buf_.clear();
    }
  }
  std::FILE* f_;
  std::string buf_;
};

}  // namespace detail

// step,t,robot,x1,x2,x3,theta,w1,w2 — robot ids are 1-based in files.
inline void write_trajectory_csv(const std::string& path, const Scenario& sc, const TrajectoryLog& log) {
  detail::CsvFile out(path);
  out.raw("step,t,robot");
  for (int j = 1; j <= sc.n; ++j) out.raw((",x" + std::to_string(j)).c_str());
  out.raw(",theta,w1,w2");
  out.endl();
  for (std::size_t r = 0; r < log.t.size(); ++r) {
    for (int i = 0; i < sc.robot_count; ++i) {
      const RobotState& s = log.robots[r][static_cast<std::size_t>(i)];
      out.integer(log.step[r]);
      out.comma();
      out.number(log.t[r]);
      out.comma();
      out.integer(i + 1);
      for (int j = 0; j < sc.n; ++j) {
        out.comma();
        out.number(s.x[static_cast<std::size_t>(j)]);
      }
      out.comma();
      out.number(sc.model == ModelKind::unicycle ? s.theta : 0.0);
      out.comma();
      out.number(s.w1);
      out.comma();
      out.number(s.w2);
      out.endl();
    }
  }
}

// step,t,kind,index,value with kind in {phi_norm, coord_err_w1, coord_err_w2,
// w1dot, w2dot}; index is the 1-based robot id, or for coordination errors
// the 1-based position in the scenario's sorted edge list.
inline void write_metrics_csv(const std::string& path, const Scenario& sc, const MetricsLog& log) {
  (void)sc;
  detail::CsvFile out(path);
  out.raw("step,t,kind,index,value");
  out.endl();
  auto emit = [&](std::size_t r, const char* kind, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      out.integer(log.step[r]);
      out.comma();
      out.number(log.t[r]);
      out.comma();
      out.raw(kind);
      out.comma();
      out.integer(static_cast<long long>(i) + 1);
      out.comma();
      out.number(vals[i]);
      out.endl();
    }
  };
  for (std::size_t r = 0; r < log.t.size(); ++r) {
    emit(r, "phi_norm", log.phi_norm[r]);
    emit(r, "coord_err_w1", log.coord_w1[r]);
    emit(r, "coord_err_w2", log.coord_w2[r]);
    if (!log.w1dot.empty()) {
      emit(r, "w1dot", log.w1dot[r]);
      emit(r, "w2dot", log.w2dot[r]);
    }
  }
}

inline nlohmann::json summary_to_json(const Scenario& sc, const RunSummary& s) {
  nlohmann::json j;
  j["final_max_phi_norm"] = s.final_max_phi_norm;
  j["final_max_coord_err"] = s.final_max_coord_err;
  j["mean_wdot_err_last10"] = s.mean_wdot_err_last10;
  j["extra"] = {{"scenario", sc.name},
                {"robots", sc.robot_count},
                {"steps", sc.steps()},
                {"dt", sc.dt},
                {"duration", sc.duration},
                {"mean_w1dot_err_last10", s.mean_w1dot_err_last10},
                {"mean_w2dot_err_last10", s.mean_w2dot_err_last10},
                {"max_w1dot_err_last10", s.max_w1dot_err_last10},
                {"max_w2dot_err_last10", s.max_w2dot_err_last10},
                {"max_coord_err_last10", s.max_coord_err_last10},
                {"degenerate_field_count", s.degenerate_count},
                {"wall_seconds", s.wall_seconds}};
  return j;
}

inline void write_summary_json(const std::string& path, const Scenario& sc, const RunSummary& s) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  const std::string text = summary_to_json(sc, s).dump(2) + "\n";
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

}  // namespace dgvf
