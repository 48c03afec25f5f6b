#pragma once

// Quasi-static simulation of the four-flipper robot over a height map.

#include <Eigen/Core>

#include <array>
#include <optional>
#include <vector>

#include "flipperbench/geometry.hpp"
#include "flipperbench/gridmap.hpp"

namespace flipperbench {

inline constexpr double kGravity = 9.81;

struct ContactReport {
  std::vector<bool> in_contact;  // parallel to body_samples()
  int belly_contacts = 0;
  int track_contacts = 0;  // main track + flipper samples in contact
  int track_total = 0;
  std::array<int, 4> flipper_contacts{};
  std::array<int, 2> main_track_contacts{};
  std::array<int, 3> support{-1, -1, -1};  // sample indices carrying the weight
  // Belly touches and the other contacts alone do not enclose the center of mass.
  bool belly_loaded = false;

  bool belly_contact() const { return belly_contacts > 0; }
};

struct SettleResult {
  double z = 0;
  double pitch = 0;
  double roll = 0;
  int iterations = 0;
  double max_penetration = 0;
  ContactReport contacts;
};

struct SettleOptions {
  double penetration_tolerance = 1e-3;
  double contact_tolerance = 5e-3;
  int max_iterations = 50;
  // Start orientation; level when absent.
  std::optional<Eigen::Vector2d> initial_pitch_roll;
};

// Lowest-energy resting pose at fixed (x, y, yaw, theta): the center of mass is
// lowered until the support set (generically three samples) blocks it.
SettleResult settle_pose(const HeightMap& map, double x, double y, double yaw,
                         const FlipperAngles& theta, const RobotGeometry& geometry,
                         const SettleOptions& options = {});

// Lifted center-of-mass height at a fixed orientation: the lowest z at which no
// sample penetrates the terrain. Exposed for brute-force oracles.
double resting_height(const HeightMap& map, double x, double y, double yaw, double pitch,
                      double roll, const FlipperAngles& theta, const RobotGeometry& geometry);

struct RobotState {
  double t = 0;
  Pose pose;
  FlipperAngles theta = FlipperAngles::Zero();
  double v_cmd = 0;
  double omega_cmd = 0;
  double ground_speed = 0;
  double clearance = 0;  // d
  Eigen::Vector3d accel{0, 0, kGravity};
  // Support state of this pose; drives the traction rule of the next step.
  int belly_contacts = 0;
  bool belly_loaded = false;
  int track_contacts = 0;
  int track_total = 0;
  // Position one step back, for the finite-difference acceleration.
  Eigen::Vector3d prev_position = Eigen::Vector3d::Zero();
  bool has_prev = false;
};

struct ActuatorCommand {
  double v = 0;
  double omega = 0;
  FlipperAngles theta_dot = FlipperAngles::Zero();
};

struct SimOptions {
  double traction_fraction = 0.25;  // K_track as a fraction of track samples
  SettleOptions settle;
};

// Traction factor from the current support state.
double traction(const RobotState& state, double traction_fraction);

// Settled initial state at a planar pose.
RobotState initial_state(const HeightMap& map, double x, double y, double yaw,
                         const FlipperAngles& theta, const RobotGeometry& geometry,
                         const SimOptions& options = {});

RobotState step(const RobotState& state, const ActuatorCommand& cmd, double dt,
                const HeightMap& map, const RobotGeometry& geometry,
                const SimOptions& options = {});

}  // namespace flipperbench
