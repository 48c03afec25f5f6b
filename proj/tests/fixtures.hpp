#pragma once

// Shared test fixtures: small arenas, canned operators and the published
// per-obstacle scores of the six-method operator study.

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "flipperbench/config.hpp"
#include "flipperbench/episode.hpp"

namespace fixtures {

using namespace flipperbench;

inline constexpr double kDeg = 3.14159265358979323846 / 180.0;
inline constexpr double X = std::numeric_limits<double>::quiet_NaN();  // failed cell

// ---- arenas ---------------------------------------------------------------------

// Flat ground with one scoring sector; nothing to climb.
inline ArenaSpec flat_arena(double length = 6.0) {
  ArenaSpec a;
  a.id = "flat";
  a.map_min = {-2.0, -1.5};
  a.map_max = {length + 2.0, 1.5};
  a.sectors = {{1, 0.0, length, 10}};
  return a;
}

// A single block as long as the robot and taller than its clearance. Driving
// off its far edge leaves the belly hung up on the edge.
inline ArenaSpec tall_pallet_arena() {
  ArenaSpec a;
  a.id = "tall-pallet";
  a.map_min = {-2.0, -1.5};
  a.map_max = {5.0, 1.5};
  ObstacleDesc o;
  o.kind = ObstacleKind::kPalletStack;
  o.length = 0.6;
  o.width = 1.0;
  o.height = 0.25;
  a.obstacles = {o};
  a.sectors = {{1, -1.0, 3.0, 10}};
  return a;
}

// Plane rising along +x at `slope_deg`, flat in y.
inline HeightMap ramp_map(double slope_deg, double res = 0.05, int cols = 80, int rows = 40) {
  HeightMap::Grid h(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) h(r, c) = std::tan(slope_deg * kDeg) * res * c;
  }
  return HeightMap(res, {0.0, 0.0}, h);
}

// ---- operators ------------------------------------------------------------------

// Holds the drive stick at `drive` every tick, nothing else pressed.
class ForwardOperator : public OperatorSource {
 public:
  explicit ForwardOperator(double drive = 0.5) : drive_(drive) {}
  std::vector<LoggedFrame> poll(const RobotState& s, const SimContext& ctx) override {
    CommandFrame f = ctx.layout.neutral(s.t);
    f.axes[std::size_t(ctx.layout.axis(ctx.mapping.drive_axis))] = drive_;
    return {{f, s.t}};
  }

 private:
  double drive_;
};

// Neutral frames every tick.
class IdleOperator : public OperatorSource {
 public:
  std::vector<LoggedFrame> poll(const RobotState& s, const SimContext& ctx) override {
    return {{ctx.layout.neutral(s.t), s.t}};
  }
};

// A frame sequence where frame i presses `counts[i]` buttons.
inline std::vector<CommandFrame> frames_with_counts(const std::vector<double>& t,
                                                    const std::vector<int>& counts,
                                                    std::size_t buttons = 4) {
  std::vector<CommandFrame> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    CommandFrame f;
    f.t = t[i];
    f.buttons.assign(buttons, 0);
    for (int k = 0; k < counts[i]; ++k) f.buttons[std::size_t(k)] = 1;
    out.push_back(f);
  }
  return out;
}

// ---- synthetic logs ---------------------------------------------------------------

// Sectors of `length` m laid end to end from arc 0.
inline std::vector<ObstacleSector> contiguous_sectors(int count, double length = 1.0, int windows = 10) {
  std::vector<ObstacleSector> out;
  for (int i = 0; i < count; ++i) out.push_back({i + 1, i * length, (i + 1) * length, windows});
  return out;
}

// A straight run along +x through `sectors`: one tick per entry of xs, `dt`
// apart, level pose, clearance d_d and gravity-only accel. Every tick carries
// one frame stamped with its time that holds `pressed` buttons down.
inline EpisodeLog line_log(const std::vector<double>& xs, std::vector<ObstacleSector> sectors,
                           double dt = 0.02, int pressed = 0, const std::string& method = "semi-afc") {
  const auto layout = ControllerLayout::gamepad();
  EpisodeLog log;
  auto& h = log.header;
  h.method = method;
  h.arena_id = "synthetic";
  h.arena_hash = "0";
  h.geometry_hash = RobotGeometry{}.hash();
  h.dt = dt;
  h.sectors = std::move(sectors);
  for (const auto& s : h.sectors) h.targets.push_back(s.id);
  h.buttons = layout.buttons;
  h.axes = layout.axes;
  h.deadzone = layout.deadzone;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    TickRecord r;
    r.t = double(i) * dt;
    r.pose.x = xs[i];
    r.pose.z = 0.18;
    r.clearance = 0.08;
    r.accel = Eigen::Vector3d(0.0, 0.0, kGravity);
    CommandFrame f = layout.neutral(r.t);
    for (int k = 0; k < pressed; ++k) f.buttons[std::size_t(k)] = 1;
    r.cmds.push_back({f, r.t});
    r.mode = "GCFC";
    log.ticks.push_back(std::move(r));
  }
  log.footer.status = EpisodeStatus::kCompleted;
  log.footer.sim_duration = xs.empty() ? 0.0 : double(xs.size() - 1) * dt;
  return log;
}

// Evenly spaced positions from a to b inclusive.
inline std::vector<double> span(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

// ---- published per-obstacle scores ------------------------------------------------

struct MethodRow {
  const char* method;
  std::array<double, 13> values;
};

inline const std::array<const char*, 6> kStudyMethods{
    "mfc-continuous", "mfc-discrete", "mfc-discrete-antistuck", "semi-afc",
    "afc-discrete-antistuck-scripted", "afc-continuous"};

// Normalized shock s_n.
inline const std::array<MethodRow, 6> kShock{{
    {"mfc-continuous", {0.74, 0.78, 0.58, 0.58, 0.57, 0.73, 0.70, 0.65, 0.76, 0.60, 0.76, 0.72, 0.71}},
    {"mfc-discrete", {0.80, 0.54, 0.70, 0.55, X, 0.80, 0.72, X, X, X, X, 0.77, X}},
    {"mfc-discrete-antistuck", {0.81, 0.61, 0.63, 0.70, 0.78, 0.81, 0.70, 0.73, 0.68, 0.75, 0.76, 0.79, 0.79}},
    {"semi-afc", {0.80, 0.67, 0.69, 0.65, 0.67, 0.80, 0.77, 0.70, 0.74, 0.81, 0.70, 0.78, 0.73}},
    {"afc-discrete-antistuck-scripted",
     {0.83, 0.75, 0.70, 0.63, 0.79, 0.75, 0.72, 0.74, 0.77, 0.73, 0.80, 0.75, 0.82}},
    {"afc-continuous", {0.79, 0.57, X, X, X, 0.77, X, X, 0.75, 0.56, 0.72, X, X}},
}};

// Normalized distance d_n.
inline const std::array<MethodRow, 6> kDistance{{
    {"mfc-continuous", {0.90, 0.94, 0.90, 0.70, 0.85, 0.82, 0.94, 0.86, 0.78, 0.77, 0.91, 0.89, 0.95}},
    {"mfc-discrete", {0.58, 0.62, 0.73, 0.45, X, 0.87, 0.79, X, X, X, X, 0.77, X}},
    {"mfc-discrete-antistuck", {0.75, 0.65, 0.87, 0.75, 0.49, 0.81, 0.78, 0.64, 0.74, 0.64, 0.65, 0.87, 0.61}},
    {"semi-afc", {0.82, 0.78, 0.64, 0.63, 0.69, 0.84, 0.81, 0.66, 0.78, 0.69, 0.76, 0.83, 0.76}},
    {"afc-discrete-antistuck-scripted",
     {0.84, 0.62, 0.60, 0.51, 0.75, 0.66, 0.51, 0.79, 0.62, 0.72, 0.73, 0.53, 0.65}},
    {"afc-continuous", {0.70, 0.46, X, X, X, 0.69, X, X, 0.82, 0.67, 0.87, X, X}},
}};

// Traversal quality TQ_n.
inline const std::array<MethodRow, 6> kQuality{{
    {"mfc-continuous", {0.82, 0.86, 0.74, 0.64, 0.71, 0.78, 0.82, 0.76, 0.77, 0.69, 0.84, 0.81, 0.83}},
    {"mfc-discrete", {0.69, 0.58, 0.72, 0.50, X, 0.84, 0.76, X, X, X, X, 0.77, X}},
    {"mfc-discrete-antistuck", {0.78, 0.63, 0.75, 0.73, 0.64, 0.81, 0.74, 0.68, 0.71, 0.69, 0.70, 0.83, 0.70}},
    {"semi-afc", {0.81, 0.72, 0.66, 0.64, 0.68, 0.82, 0.79, 0.68, 0.76, 0.75, 0.73, 0.81, 0.74}},
    {"afc-discrete-antistuck-scripted",
     {0.84, 0.69, 0.65, 0.57, 0.77, 0.71, 0.61, 0.76, 0.69, 0.73, 0.76, 0.64, 0.73}},
    {"afc-continuous", {0.74, 0.51, X, X, X, 0.73, X, X, 0.79, 0.62, 0.80, X, X}},
}};

// Reported load CL_n.
inline const std::array<MethodRow, 6> kLoad{{
    {"mfc-continuous", {0.57, 0.59, 0.57, 0.56, 0.54, 0.53, 0.52, 0.76, 0.42, 0.69, 0.37, 0.53, 0.53}},
    {"mfc-discrete", {0.42, 0.46, 0.28, 0.35, X, 0.28, 0.33, X, X, X, X, 0.26, X}},
    {"mfc-discrete-antistuck", {0.48, 0.30, 0.22, 0.33, 0.32, 0.39, 0.32, 0.64, 0.27, 0.29, 0.31, 0.42, 0.36}},
    {"semi-afc", {0.35, 0.51, 0.32, 0.44, 0.37, 0.36, 0.30, 0.68, 0.35, 0.34, 0.32, 0.40, 0.45}},
    {"afc-discrete-antistuck-scripted",
     {0.35, 0.32, 0.26, 0.46, 0.42, 0.39, 0.19, 0.54, 0.35, 0.20, 0.44, 0.28, 0.43}},
    {"afc-continuous", {0.43, 0.41, X, X, X, 0.27, X, X, 0.28, 0.23, 0.26, X, X}},
}};

// The six-method table as scored points; failed cells carry the penalty values.
inline std::vector<QualityLoadPoint> study_points() {
  std::vector<QualityLoadPoint> out;
  for (std::size_t m = 0; m < kStudyMethods.size(); ++m) {
    for (int k = 0; k < 13; ++k) {
      QualityLoadPoint p;
      p.method = kStudyMethods[m];
      p.obstacle = k + 1;
      p.traversed = !std::isnan(kQuality[m].values[std::size_t(k)]);
      if (p.traversed) {
        p.s_n = kShock[m].values[std::size_t(k)];
        p.d_n = kDistance[m].values[std::size_t(k)];
        p.tq_n = kQuality[m].values[std::size_t(k)];
        p.cl_n = kLoad[m].values[std::size_t(k)];
        p.cl_norm = 1.0 - p.cl_n;
        p.cl_raw = 10.0 * k + m;
      }
      out.push_back(p);
    }
  }
  return out;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("flipperbench_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
