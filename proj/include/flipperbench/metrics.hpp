#pragma once

// Scoring: normalizations, cognitive load, shock and clearance windows,
// sector slicing, traversal quality, calibration and aggregation.

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flipperbench/arena.hpp"
#include "flipperbench/command.hpp"
#include "flipperbench/logstore.hpp"

namespace flipperbench {

// 2 - 2 / (1 + exp(-x / x_hat)); 1 at x = 0, decreasing.
double sigmoid_norm(double x, double x_hat);

// x / x_min clamped to [0, 1].
double linear_norm(double x, double x_min);

// Sum over i >= 1 of (pressed count of frame i) * (t_i - t_{i-1}).
double cognitive_load(const std::vector<CommandFrame>& frames, double deadzone);

double shock(const Eigen::Vector3d& accel);

// Mean of the normalized shock and clearance terms.
double traversal_quality(double s_n, double d_n);

enum class Reducer { kMax, kMin };

struct ArcSample {
  double arc = 0;
  double value = 0;
};

// Splits [start, end) into `windows` equal pieces by arc length and reduces
// each. Throws ScoringError when a window holds no sample.
std::vector<double> window_reduce(const std::vector<ArcSample>& samples, double start, double end,
                                  int windows, Reducer reducer);

struct SectorGroup {
  int sector = 0;
  bool entered = false;
  bool traversed = false;  // some tick reached the sector end
  std::vector<ArcSample> shock;
  std::vector<ArcSample> clearance;
  // Frames from the ticks inside the sector, preceded by the last frame
  // received before it so the first interval is accounted for.
  std::vector<CommandFrame> frames;
};

// One group per sector listed in the log header, in header order.
std::vector<SectorGroup> sector_slices(const EpisodeLog& log);

struct CalibrationTable {
  std::map<int, double> cl_min;          // per sector
  double s_max = 0;                      // global
  std::map<int, double> s_max_override;  // optional per-sector values
  double d_d = 0.08;

  void validate() const;  // throws ConfigError
  double s_max_for(int sector) const;
  double cl_min_for(int sector) const;  // throws ConfigError when missing
};

struct ScoringOptions {
  bool max_clearance_windows = false;  // max for clearance windows too
  double deadzone = 0.1;               // score_log takes it from the log header
};

struct QualityLoadPoint {
  std::string method;
  int obstacle = 0;
  bool traversed = false;
  double s_n = 0;
  double d_n = 0;
  double tq_n = 0;
  double cl_raw = 0;
  double cl_n = 1;     // reported load, 1 - N(CL, CL_min); higher means more load
  double cl_norm = 0;  // N(CL, CL_min) as defined
};

QualityLoadPoint score_sector(const SectorGroup& group, const ObstacleSector& sector,
                              const CalibrationTable& calib, const std::string& method,
                              const ScoringOptions& options = {});

// Points for the log's target sectors.
std::vector<QualityLoadPoint> score_log(const EpisodeLog& log, const CalibrationTable& calib,
                                        const ScoringOptions& options = {});

// Keeps one point per (method, obstacle) from several logs: traversed first,
// then higher TQ_n, then the earlier input.
std::vector<QualityLoadPoint> select_points(const std::vector<std::vector<QualityLoadPoint>>& per_log);

struct MethodMean {
  std::string method;
  double cl_n = 0, tq_n = 0, s_n = 0, d_n = 0;
  std::vector<int> obstacles;
  std::vector<bool> traversed;  // parallel to obstacles
};

// Means per method over its obstacles, failures included at penalty values.
// Every method must have exactly one point for each obstacle seen.
std::vector<MethodMean> aggregate(const std::vector<QualityLoadPoint>& points);

// CL_min per sector from the traversing logs; s_max from every in-sector sample.
CalibrationTable calibrate(const std::vector<EpisodeLog>& logs);

// Stable ordering used by every report: registered policies first, then by name.
std::vector<std::string> method_order(const std::vector<QualityLoadPoint>& points);

}  // namespace flipperbench
