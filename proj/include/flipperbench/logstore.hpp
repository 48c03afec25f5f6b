#pragma once

// Episode logs: one JSON object per line (header, ticks, footer).

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flipperbench/arena.hpp"
#include "flipperbench/command.hpp"
#include "flipperbench/geometry.hpp"

namespace flipperbench {

inline constexpr std::string_view kLogSchema = "flipperbench.episode/1.0";

// A frame as it reached the simulator: client timestamp in frame.t, receipt
// time (sim clock) in rx.
struct LoggedFrame {
  CommandFrame frame;
  double rx = 0;

  bool operator==(const LoggedFrame&) const = default;
};

struct TickRecord {
  double t = 0;
  Pose pose;
  FlipperAngles theta = FlipperAngles::Zero();
  double v_cmd = 0;
  double omega_cmd = 0;
  double ground_speed = 0;
  double clearance = 0;
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
  std::vector<LoggedFrame> cmds;  // frames received since the previous tick
  std::string mode;
  bool stuck = false;

  bool operator==(const TickRecord&) const = default;
};

struct LogHeader {
  std::string schema{kLogSchema};
  std::string method;
  std::string arena_id;
  std::string arena_hash;
  std::string geometry_hash;
  double dt = 0.02;
  std::optional<std::string> start_time;  // wall clock, teleop sessions only
  double d_d = 0.08;
  TraversalLine line;
  std::vector<ObstacleSector> sectors;
  std::vector<int> targets;  // sector ids this episode was meant to cross
  std::vector<std::string> buttons;
  std::vector<std::string> axes;
  double deadzone = 0.1;
  std::uint64_t seed = 0;

  bool operator==(const LogHeader& o) const;
};

enum class EpisodeStatus { kCompleted, kFailed, kAborted };

std::string_view to_string(EpisodeStatus status);
EpisodeStatus status_from_string(std::string_view s);  // throws ParseError

struct LogFooter {
  EpisodeStatus status = EpisodeStatus::kCompleted;
  std::string reason;
  double sim_duration = 0;
  std::optional<double> wall_clock;  // seconds; absent for headless runs

  bool operator==(const LogFooter&) const = default;
};

struct EpisodeLog {
  LogHeader header;
  std::vector<TickRecord> ticks;
  LogFooter footer;

  // Throws ValidationError naming the offending tick.
  void validate() const;
  bool operator==(const EpisodeLog&) const = default;
};

void write_log(const EpisodeLog& log, std::ostream& out);
void write_log(const EpisodeLog& log, const std::filesystem::path& path);
std::string log_to_string(const EpisodeLog& log);

EpisodeLog read_log(std::istream& in);
EpisodeLog read_log(const std::filesystem::path& path);
EpisodeLog log_from_string(const std::string& text);

// Every *.jsonl file in a directory, sorted by file name.
std::vector<std::filesystem::path> list_logs(const std::filesystem::path& dir);

// Column mapping for externally recorded runs.
struct ImportMapping {
  std::string time_column = "t";
  std::string command_time_column;  // defaults to time_column
  std::vector<std::string> button_columns;
  std::vector<std::string> axis_columns;
  std::string x = "x", y = "y", z = "z";
  std::string yaw = "yaw", pitch = "pitch", roll = "roll";
  std::array<std::string, 4> theta{"theta_fl", "theta_fr", "theta_rl", "theta_rr"};
  std::string clearance = "d";
  std::array<std::string, 3> accel{"ax", "ay", "az"};
  std::string ground_speed;  // optional; derived from positions when empty
  std::string method = "external";
  double deadzone = 0.1;
  std::optional<EpisodeStatus> status;  // inferred when absent
};

// Builds a scoreable log from a command stream and a trajectory stream. Each
// command frame is attached to the first trajectory tick at or after it.
EpisodeLog import_external(std::istream& commands_csv, std::istream& trajectory_csv,
                           const ImportMapping& mapping, const ArenaSpec& arena,
                           const RobotGeometry& geometry);

// Writes the two CSV streams that import_external reads back into `log`.
void export_external(const EpisodeLog& log, const ImportMapping& mapping,
                     std::ostream& commands_csv, std::ostream& trajectory_csv);

}  // namespace flipperbench
