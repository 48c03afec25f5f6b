#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flipperbench/gridmap.hpp"

namespace flipperbench {

enum Flipper : int { kFrontLeft = 0, kFrontRight = 1, kRearLeft = 2, kRearRight = 3 };

using FlipperAngles = Eigen::Vector4d;

// Four-track robot: a box-shaped body with a flipper pivoting at each corner of
// the belly. The body frame origin is the center of mass; x forward, y left,
// z up. The belly plane lies com_height below the origin.
//
// Flipper angle theta is measured from the nominal support angle, at which the
// flipper tip sits `clearance` below the belly. Positive theta rotates the tip
// further down (raising the body); theta = -asin(clearance / flipper_length)
// puts the flipper flush with the belly.
struct RobotGeometry {
  double body_length = 0.6;
  double body_width = 0.4;
  double body_height = 0.2;
  double com_height = 0.1;
  double clearance = 0.08;  // d_d
  double flipper_length = 0.35;
  double flipper_width = 0.1;
  double flipper_limit = 1.5707963267948966;
  // Pivot offsets in the body frame; empty means "corners of the belly".
  std::array<Eigen::Vector3d, 4> pivots{};
  bool custom_pivots = false;
  int track_samples = 12;    // per main track (one per side, flush with the belly)
  int flipper_samples = 8;   // per flipper
  int belly_cols = 9;        // along x
  int belly_rows = 5;        // across y

  void validate() const;
  Eigen::Vector3d pivot(int flipper) const;
  double nominal_angle() const;
  // Stable textual digest of every field, used for log headers.
  std::string hash() const;
};

enum class SampleKind : std::uint8_t { kBelly, kTrack, kFlipper };

struct BodySample {
  Eigen::Vector3d point;  // body frame
  SampleKind kind;
  int element;  // track side (0 left, 1 right) or flipper index; -1 for belly
};

// All contact sample points of the robot at the given flipper angles.
std::vector<BodySample> body_samples(const RobotGeometry& geometry, const FlipperAngles& theta);

// Belly grid only (independent of flipper angles).
std::vector<Eigen::Vector3d> belly_samples(const RobotGeometry& geometry);

// Flipper tip in the body frame.
Eigen::Vector3d flipper_tip(const RobotGeometry& geometry, int flipper, double theta);

struct Pose {
  double x = 0, y = 0, z = 0;
  double yaw = 0, pitch = 0, roll = 0;

  Eigen::Vector3d position() const { return {x, y, z}; }
  bool operator==(const Pose&) const = default;
};

// Body-to-world rotation, R = Rz(yaw) * Ry(pitch) * Rx(roll). Positive pitch
// lowers the nose.
Eigen::Matrix3d body_rotation(double yaw, double pitch, double roll);

Eigen::Vector3d to_world(const Pose& pose, const Eigen::Vector3d& body_point);

// Minimum height of the belly above the terrain, floored at 0.
double min_clearance(const HeightMap& map, const Pose& pose, const RobotGeometry& geometry);

}  // namespace flipperbench
