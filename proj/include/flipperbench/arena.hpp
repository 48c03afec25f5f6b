#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flipperbench/gridmap.hpp"

namespace flipperbench {

enum class ObstacleKind {
  kPalletStack,
  kRotatedPallet,
  kUpDownStaircase,
  kTiltedBuriedPallet,
  kARamp,
  kURamp,
  kFlipperSwitchGap,
};

std::string_view to_string(ObstacleKind kind);
ObstacleKind obstacle_kind_from_string(std::string_view name);

// Standard euro pallet, overridable from config.
struct PalletDims {
  double length = 1.2;
  double width = 0.8;
  double height = 0.144;
};

// One obstacle. Local frame: u along `yaw`, v across; the footprint is the
// rectangle |u| <= length/2, |v| <= width/2 centered at `position`.
struct ObstacleDesc {
  ObstacleKind kind = ObstacleKind::kPalletStack;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double yaw = 0;
  double length = 1.2;
  double width = 0.8;
  double height = 0.144;  // layer height for stacks, peak height otherwise
  int stack = 1;
  int steps = 3;            // staircase steps per side
  double gap = 0.5;         // flipper-switch-gap: gap length
  double gap_height = 0.02; // flipper-switch-gap: floor height inside the gap
  double depth = 0.0;       // u-ramp: dip below the rim (0 -> half the height)

  // Height contributed at a world point, 0 outside the footprint.
  double height_at(const Eigen::Vector2d& world) const;
  double peak_height() const;
  // World-frame footprint corners.
  std::array<Eigen::Vector2d, 4> corners() const;
};

// Straight traversal line; arc length is the projection onto it.
struct TraversalLine {
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  double heading = 0;

  Eigen::Vector2d direction() const;
  double arc_length(double x, double y) const;
  Eigen::Vector2d point_at(double s) const;
};

// Along-track interval assigned to one obstacle, scored on `windows` equal
// windows. Intervals are half-open: [start, end).
struct ObstacleSector {
  int id = 0;
  double start = 0;
  double end = 0;
  int windows = 10;

  double length() const { return end - start; }
  bool contains(double s) const { return s >= start && s < end; }
};

struct ArenaSpec {
  std::string id = "default";
  double resolution = 0.05;
  Eigen::Vector2d map_min{-3.0, -2.5};
  Eigen::Vector2d map_max{70.0, 2.5};
  TraversalLine line;
  PalletDims pallet;
  std::vector<ObstacleDesc> obstacles;
  std::vector<ObstacleSector> sectors;

  // Throws ConfigError on broken invariants (sector lengths, ordering, sizes).
  void validate() const;
  std::string hash() const;
  const ObstacleSector& sector(int id) const;
  // Along-track [min, max] covered by an obstacle footprint.
  std::pair<double, double> obstacle_extent(std::size_t index) const;
};

// The 13-obstacle benchmark arena.
ArenaSpec default_arena();

// Max composition of flat ground (0 m) and every obstacle profile.
HeightMap build_arena(const ArenaSpec& spec);

}  // namespace flipperbench
