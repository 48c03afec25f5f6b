#pragma once

// Flipper-control policies behind one interface, plus the headless driver.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flipperbench/command.hpp"
#include "flipperbench/geometry.hpp"
#include "flipperbench/gridmap.hpp"
#include "flipperbench/sim.hpp"

namespace flipperbench {

// Either four angular velocities or four absolute targets tracked at `rate`.
struct FlipperCommand {
  enum class Form { kVelocity, kTarget };

  Form form = Form::kVelocity;
  FlipperAngles values = FlipperAngles::Zero();
  double rate = 0;

  static FlipperCommand velocity(const FlipperAngles& theta_dot) {
    return {Form::kVelocity, theta_dot, 0.0};
  }
  static FlipperCommand target(const FlipperAngles& theta, double rate) {
    return {Form::kTarget, theta, rate};
  }
  static FlipperCommand zero() { return velocity(FlipperAngles::Zero()); }

  // Angular velocities realizing this command over one step of length dt.
  // Targets are approached at most at `rate` and reached exactly.
  FlipperAngles resolve(const FlipperAngles& theta, double dt, double theta_dot_max) const;

  bool operator==(const FlipperCommand& o) const {
    return form == o.form && values == o.values && rate == o.rate;
  }
};

enum class ModeName { kDriveFlat, kApproachFrontUp, kClimb, kDescent, kMaxSupport };

std::string_view to_string(ModeName mode);
ModeName mode_from_string(std::string_view name);  // throws ConfigError

struct DiscreteMode {
  ModeName name;
  FlipperAngles targets;  // FL FR RL RR
};

struct ModeTable {
  std::array<DiscreteMode, 5> modes;

  static ModeTable defaults();
  const DiscreteMode& get(ModeName name) const;
  void validate() const;
};

struct AntiStuckConfig {
  double v_cmd_min = 0.05;
  double ground_speed_max = 0.01;
  double persistence = 1.0;
  double release_clearance = 0.0;  // <= 0 means "use d_d"
  double cooldown = 0.0;           // seconds before re-arming; 0 disables
};

struct PolicyConfig {
  double gain = 2.0;  // p
  double d_d = 0.08;
  double oafc_lookahead = 0.3;
  int oafc_factor = 4;
  double theta_dot_max = 1.5;
  double tracking_rate = 1.5;
  double tracking_gain = 4.0;
  AntiStuckConfig anti_stuck;
  ModeTable modes = ModeTable::defaults();

  void validate() const;
};

// Controller mapping for the manual variants.
struct MappingConfig {
  double v_max = 0.6;
  double omega_max = 1.0;
  double theta_dot_max = 1.5;
  std::string drive_axis = "LY";
  std::string turn_axis = "LX";
  std::string flipper_axis = "RY";
  // Modifier held -> flipper driven by the flipper axis (FL, FR, RL, RR).
  std::array<std::string, 4> flipper_modifiers{"L1", "R1", "L2", "R2"};
  // Button selecting each discrete mode, indexed by ModeName.
  std::array<std::string, 5> mode_buttons{"A", "Y", "X", "B", "R1"};
  std::string front_mode_toggle = "SELECT";
};

// ---- primitive controllers ------------------------------------------------

// Ground-clearance regulator: p * (d_d - d). Positive presses the flippers down.
double gcfc_step(double d, double d_d, double p);

enum class Side { kLeft, kRight };

// Front-flipper target aligned with the most inclined normal in the region just
// ahead of that side's flipper tip. Empty when the region misses the map.
std::optional<double> oafc_target(const SurfaceNormalMap& normals, const RobotState& state,
                                  Side side, const PolicyConfig& config,
                                  const RobotGeometry& geometry);

// Cells of the OAFC lookahead region (for inspection and tests).
struct RegionCell {
  Eigen::Index col, row;
  double distance;  // from the flipper tip to the cell center
};
std::vector<RegionCell> oafc_region(const SurfaceNormalMap& normals, const RobotState& state,
                                    Side side, const PolicyConfig& config,
                                    const RobotGeometry& geometry);

enum class FrontMode { kGcfc, kOafc };

FlipperCommand semi_afc(const RobotState& state, const SurfaceNormalMap& normals,
                        FrontMode front_mode, const PolicyConfig& config,
                        const RobotGeometry& geometry);

FlipperCommand discrete_mode_command(ModeName mode, const PolicyConfig& config);
FlipperCommand discrete_mode_command(std::string_view mode_name, const PolicyConfig& config);

enum class ManualVariant { kContinuous, kDiscrete };

struct ManualOutput {
  double v = 0;
  double omega = 0;
  FlipperCommand flippers;                 // continuous variant
  std::optional<ModeName> mode_select;     // discrete variant
};

ManualOutput manual_map(const CommandFrame& frame, const ControllerLayout& layout,
                        const MappingConfig& mapping, ManualVariant variant);

// Pure pursuit along a polyline of waypoints.
class ScriptedDriver {
 public:
  struct Options {
    double v_nom = 0.3;
    double heading_gain = 1.5;
    double capture_radius = 0.2;
  };

  ScriptedDriver(std::vector<Eigen::Vector2d> path, Options options);
  explicit ScriptedDriver(std::vector<Eigen::Vector2d> path)
      : ScriptedDriver(std::move(path), Options{}) {}

  struct Output {
    double v = 0;
    double omega = 0;
    bool done = false;
  };
  Output update(const Pose& pose);
  bool done() const { return next_ >= path_.size(); }

 private:
  std::vector<Eigen::Vector2d> path_;
  Options options_;
  std::size_t next_ = 0;
};

// ---- policy interface -------------------------------------------------------

struct PolicyContext {
  const HeightMap* map = nullptr;
  const SurfaceNormalMap* normals = nullptr;  // low-resolution normals for OAFC
  const RobotGeometry* geometry = nullptr;
  const ControllerLayout* layout = nullptr;
  double dt = 0.02;
};

struct PolicyOutput {
  double v = 0;
  double omega = 0;
  FlipperCommand flippers;
  std::string mode;
  bool stuck = false;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyOutput act(const RobotState& state, const CommandFrame& frame,
                           const PolicyContext& ctx) = 0;
  virtual std::string name() const = 0;
};

// Chooses a discrete mode from the robot state and terrain. Stands in for a
// learned classifier.
class ModeClassifier {
 public:
  virtual ~ModeClassifier() = default;
  virtual ModeName classify(const RobotState& state, const PolicyContext& ctx) = 0;
};

// Hand-written terrain rules: looks at the profile ahead of and under the robot.
class RuleModeClassifier : public ModeClassifier {
 public:
  ModeName classify(const RobotState& state, const PolicyContext& ctx) override;
};

class ManualContinuousPolicy : public Policy {
 public:
  ManualContinuousPolicy(PolicyConfig config, MappingConfig mapping)
      : config_(std::move(config)), mapping_(std::move(mapping)) {}
  PolicyOutput act(const RobotState&, const CommandFrame&, const PolicyContext&) override;
  std::string name() const override { return "mfc-continuous"; }

 private:
  PolicyConfig config_;
  MappingConfig mapping_;
};

class ManualDiscretePolicy : public Policy {
 public:
  ManualDiscretePolicy(PolicyConfig config, MappingConfig mapping)
      : config_(std::move(config)), mapping_(std::move(mapping)) {}
  PolicyOutput act(const RobotState&, const CommandFrame&, const PolicyContext&) override;
  std::string name() const override { return "mfc-discrete"; }
  ModeName mode() const { return mode_; }

 private:
  PolicyConfig config_;
  MappingConfig mapping_;
  ModeName mode_ = ModeName::kDriveFlat;
};

class ClassifierModePolicy : public Policy {
 public:
  ClassifierModePolicy(PolicyConfig config, MappingConfig mapping,
                       std::unique_ptr<ModeClassifier> classifier)
      : config_(std::move(config)), mapping_(std::move(mapping)), classifier_(std::move(classifier)) {}
  PolicyOutput act(const RobotState&, const CommandFrame&, const PolicyContext&) override;
  std::string name() const override { return "afc-discrete-scripted"; }

 private:
  PolicyConfig config_;
  MappingConfig mapping_;
  std::unique_ptr<ModeClassifier> classifier_;
};

class SemiAfcPolicy : public Policy {
 public:
  SemiAfcPolicy(PolicyConfig config, MappingConfig mapping)
      : config_(std::move(config)), mapping_(std::move(mapping)) {}
  PolicyOutput act(const RobotState&, const CommandFrame&, const PolicyContext&) override;
  std::string name() const override { return "semi-afc"; }
  FrontMode front_mode() const { return front_; }

 private:
  PolicyConfig config_;
  MappingConfig mapping_;
  FrontMode front_ = FrontMode::kGcfc;
  bool toggle_was_down_ = false;
};

// Overrides the inner policy with all flippers down while the robot is stuck
// (commanded forward motion without ground speed for `persistence` seconds).
class AntiStuckPolicy : public Policy {
 public:
  AntiStuckPolicy(std::unique_ptr<Policy> inner, PolicyConfig config, std::string name = {})
      : inner_(std::move(inner)), config_(std::move(config)), name_(std::move(name)) {}
  PolicyOutput act(const RobotState&, const CommandFrame&, const PolicyContext&) override;
  std::string name() const override { return name_.empty() ? inner_->name() + "-antistuck" : name_; }

  bool stuck() const { return stuck_; }
  int activations() const { return activations_; }
  Policy& inner() { return *inner_; }

 private:
  std::unique_ptr<Policy> inner_;
  PolicyConfig config_;
  std::string name_;
  bool stuck_ = false;
  double stuck_timer_ = 0;
  double cooldown_left_ = 0;
  int activations_ = 0;
};

// Registered names: mfc-continuous, mfc-discrete, mfc-discrete-antistuck,
// semi-afc, afc-discrete-antistuck-scripted.
const std::vector<std::string>& registered_policies();
std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyConfig& config,
                                    const MappingConfig& mapping);

}  // namespace flipperbench
