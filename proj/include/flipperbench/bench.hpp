#pragma once

// The benchmark verbs behind the command-line tool. Each writes its files and
// a short human-readable summary to `report`.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flipperbench/config.hpp"
#include "flipperbench/logstore.hpp"
#include "flipperbench/metrics.hpp"

namespace flipperbench {

// Runs every configured pass of `method` with the scripted operator and writes
// one log per pass into out_dir. Returns the written paths.
std::vector<std::filesystem::path> cmd_run(const BenchConfig& config, const std::string& method,
                                           const std::filesystem::path& out_dir, std::ostream& report);

// File name of the log for one pass: "<method>_full.jsonl" or "<method>_sector07.jsonl".
std::string log_file_name(const std::string& method, const std::vector<int>& targets);

// Reads every log in log_dir; errors name the file.
std::vector<EpisodeLog> load_logs(const std::filesystem::path& log_dir);

CalibrationTable cmd_calibrate(const std::filesystem::path& log_dir, const std::filesystem::path& out_file,
                               std::ostream& report);

// Writes scores.csv, means.csv, shock.csv, distance.csv, quality.csv and load.csv.
std::vector<QualityLoadPoint> cmd_score(const std::filesystem::path& log_dir,
                                        const std::filesystem::path& calibration,
                                        const std::filesystem::path& out_dir,
                                        const ScoringOptions& options, std::ostream& report);

// Scoring reports for an already selected point set, one per obstacle and method.
std::string scores_csv(const std::vector<QualityLoadPoint>& points);
std::string means_csv(const std::vector<MethodMean>& means);
enum class TableColumn { kShock, kDistance, kQuality, kLoad };
std::string table_csv(const std::vector<QualityLoadPoint>& points, const std::vector<MethodMean>& means,
                      TableColumn column);

std::vector<QualityLoadPoint> parse_scores_csv(std::istream& in);

struct GraphPoint {
  std::string method;
  std::string obstacle;  // "*" for the method mean
  double cl_n = 0;
  double tq_n = 0;
};

// Plotted coordinates: every (method, obstacle) point followed by one mean per
// method. Failed cells sit at (1, 0).
std::vector<GraphPoint> graph_points(const std::vector<QualityLoadPoint>& points);
std::string graph_csv(const std::vector<GraphPoint>& points);
std::string graph_svg(const std::vector<GraphPoint>& points);

struct SvgFrame {
  double width = 640, height = 480;
  double left = 70, right = 170, top = 30, bottom = 60;

  double x(double cl_n) const { return left + cl_n * (width - left - right); }
  double y(double tq_n) const { return top + (1.0 - tq_n) * (height - top - bottom); }
};

std::vector<GraphPoint> cmd_graph(const std::filesystem::path& scores, const std::filesystem::path& out_svg,
                                  const std::filesystem::path& out_csv, std::ostream& report);

struct ReplayResult {
  EpisodeLog replayed;
  bool reproduced = false;  // same ticks as the recording
  std::optional<std::size_t> first_divergence;
  std::vector<QualityLoadPoint> points;  // when a calibration is given
};

// Drives the log's recorded frames through the simulator again and re-scores.
ReplayResult cmd_replay(const BenchConfig& config, const std::filesystem::path& log_path,
                        const std::optional<std::filesystem::path>& calibration,
                        const std::optional<std::filesystem::path>& out_log, std::ostream& report);

// Writes text to a file, replacing it; throws ConfigError when that fails.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace flipperbench
