#pragma once

// Fixed-step episode runner plus the operator sources that feed it frames.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "flipperbench/arena.hpp"
#include "flipperbench/command.hpp"
#include "flipperbench/logstore.hpp"
#include "flipperbench/policies.hpp"
#include "flipperbench/sim.hpp"

namespace flipperbench {

// Everything an episode needs that does not change during it.
struct SimContext {
  ArenaSpec arena;
  HeightMap map;
  SurfaceNormalMap normals;  // low resolution, for OAFC
  RobotGeometry geometry;
  ControllerLayout layout;
  SimOptions sim;
  PolicyConfig policy;
  MappingConfig mapping;

  PolicyContext policy_context(double dt) const;
};

SimContext make_context(ArenaSpec arena, RobotGeometry geometry, PolicyConfig policy = {},
                        MappingConfig mapping = {},
                        ControllerLayout layout = ControllerLayout::gamepad(),
                        SimOptions sim = {});

// Source of operator input. poll() is called once per tick with the state the
// frames will act on and returns every frame received since the last call.
class OperatorSource {
 public:
  virtual ~OperatorSource() = default;
  virtual std::vector<LoggedFrame> poll(const RobotState& state, const SimContext& ctx) = 0;
  // True once the operator asked to end the episode.
  virtual bool stopped() const { return false; }
};

// Replays recorded frames at their receipt times. Plain frames are taken to
// have arrived at their own timestamps.
class RecordedOperator : public OperatorSource {
 public:
  explicit RecordedOperator(std::vector<LoggedFrame> frames) : frames_(std::move(frames)) {}
  explicit RecordedOperator(const std::vector<CommandFrame>& frames);
  std::vector<LoggedFrame> poll(const RobotState& state, const SimContext& ctx) override;

 private:
  std::vector<LoggedFrame> frames_;
  std::size_t next_ = 0;
};

// Headless stand-in for the human operator: drives the traversal line with a
// pure-pursuit driver and works the flipper controls the way the chosen
// method requires (modifier + stick, mode buttons, or the front-mode toggle).
class ScriptedOperator : public OperatorSource {
 public:
  struct Options {
    ScriptedDriver::Options driver;
    double reaction_min = 0.2;  // s, delay before reacting to a terrain change
    double reaction_max = 0.5;
    double press_duration = 0.1;   // s a mode button stays down
    double flipper_tolerance = 0.05;  // rad, continuous variant
    // OAFC is on while the front pivots are within [start - lead, end + trail]
    // of an obstacle.
    double oafc_lead = 0.4;
    double oafc_trail = 0.0;
    double stall_speed = 0.01;   // m/s, below this the robot counts as stalled
    double stall_release = 1.0;  // s stalled before the operator intervenes
  };

  // Drives the traversal line from arc length start_arc past end_arc.
  ScriptedOperator(std::string method, const SimContext& ctx, double start_arc, double end_arc,
                   std::uint64_t seed, Options options);
  ScriptedOperator(std::string method, const SimContext& ctx, double start_arc, double end_arc,
                   std::uint64_t seed)
      : ScriptedOperator(std::move(method), ctx, start_arc, end_arc, seed, Options{}) {}

  std::vector<LoggedFrame> poll(const RobotState& state, const SimContext& ctx) override;

 private:
  double uniform01();
  ModeName desired_mode(const RobotState& state, const SimContext& ctx);

  std::string method_;
  Options options_;
  ScriptedDriver driver_;
  std::mt19937_64 rng_;
  RuleModeClassifier classifier_;
  std::vector<std::pair<double, double>> oafc_windows_;  // along-track intervals

  ModeName seen_mode_ = ModeName::kDriveFlat;   // latest classifier output
  ModeName acted_mode_ = ModeName::kDriveFlat;  // mode the operator has switched to
  ModeName sent_mode_ = ModeName::kDriveFlat;   // last mode button pressed
  double react_at_ = -1;
  double press_until_ = -1;
  bool front_oafc_ = false;
  bool toggle_down_ = false;
  double moving_at_ = 0;  // last time the robot was seen moving
  int gave_up_ = -1;      // obstacle window where OAFC was abandoned
  bool recovering_ = false;  // flippers down until the belly is clear again
};

struct EpisodeConfig {
  std::string method;
  double dt = 0.02;
  double sector_timeout = 60.0;
  double capsize_limit = 75.0 * 3.14159265358979323846 / 180.0;
  double start_offset = 1.0;  // m before the first target sector
  double lateral_offset = 0.0;
  double start_yaw = 0.0;     // relative to the traversal heading
  std::vector<int> targets;   // empty means every sector
  FlipperAngles initial_theta = FlipperAngles::Zero();
  // Explicit start (x, y, yaw); replaces start_offset, lateral_offset and start_yaw.
  std::optional<Eigen::Vector3d> start_pose;
  std::uint64_t seed = 0;
  std::optional<std::string> start_time;
  // Hard cap on simulated time; 0 disables.
  double max_duration = 0.0;
};

// Called after every step; return false to abort the episode.
using TickObserver = std::function<bool(const RobotState&, const PolicyOutput&)>;

EpisodeLog run_episode(const EpisodeConfig& config, Policy& policy, OperatorSource& source,
                       const SimContext& ctx, const TickObserver& observer = {});

// Convenience: builds the policy and scripted operator for `method`.
EpisodeLog run_scripted(const EpisodeConfig& config, const SimContext& ctx,
                        const ScriptedOperator::Options& options = {});

// Arc lengths where the episode starts and where it counts as complete.
double episode_start_arc(const EpisodeConfig& config, const ArenaSpec& arena);
double episode_end_arc(const EpisodeConfig& config, const ArenaSpec& arena);

}  // namespace flipperbench
