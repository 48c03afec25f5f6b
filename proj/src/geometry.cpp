#include "flipperbench/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace flipperbench {

void RobotGeometry::validate() const {
  const double lengths[] = {body_length, body_width, body_height, com_height, clearance,
                            flipper_length, flipper_width};
  for (double v : lengths) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("robot lengths must be positive");
  }
  if (clearance >= flipper_length) {
    throw ConfigError("nominal clearance must be shorter than the flipper");
  }
  if (std::abs(flipper_limit - std::numbers::pi / 2) > 1e-12) {
    throw ConfigError("flipper limit must be pi/2");
  }
  if (track_samples < 2 || flipper_samples < 1 || belly_cols < 2 || belly_rows < 1) {
    throw ConfigError("robot sample counts too small");
  }
}

Eigen::Vector3d RobotGeometry::pivot(int flipper) const {
  if (custom_pivots) return pivots[flipper];
  const double sx = flipper < 2 ? 0.5 : -0.5;
  const double sy = (flipper % 2 == 0) ? 0.5 : -0.5;
  return {sx * body_length, sy * body_width, -com_height};
}

double RobotGeometry::nominal_angle() const { return std::asin(clearance / flipper_length); }

std::string RobotGeometry::hash() const {
  std::ostringstream s;
  s.precision(17);
  s << body_length << ',' << body_width << ',' << body_height << ',' << com_height << ','
    << clearance << ',' << flipper_length << ',' << flipper_width << ',' << track_samples << ','
    << flipper_samples << ',' << belly_cols << ',' << belly_rows;
  for (int i = 0; i < 4; ++i) {
    const auto p = pivot(i);
    s << ',' << p.x() << ',' << p.y() << ',' << p.z();
  }
  // FNV-1a, printed as hex.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

Eigen::Vector3d flipper_tip(const RobotGeometry& g, int flipper, double theta) {
  const double beta = g.nominal_angle() + theta;
  const double dir = flipper < 2 ? 1.0 : -1.0;
  return g.pivot(flipper) +
         g.flipper_length * Eigen::Vector3d(dir * std::cos(beta), 0.0, -std::sin(beta));
}

std::vector<Eigen::Vector3d> belly_samples(const RobotGeometry& g) {
  std::vector<Eigen::Vector3d> out;
  out.reserve(std::size_t(g.belly_cols * g.belly_rows));
  // Inset from the ends, where the tracks wrap around their idlers, and from
  // the sides, where the tracks themselves run.
  const double half_l = 0.35 * g.body_length;
  const double half_w = 0.4 * g.body_width;
  for (int r = 0; r < g.belly_rows; ++r) {
    const double y = g.belly_rows == 1 ? 0.0 : -half_w + 2 * half_w * r / (g.belly_rows - 1);
    for (int c = 0; c < g.belly_cols; ++c) {
      const double x = g.belly_cols == 1 ? 0.0 : -half_l + 2 * half_l * c / (g.belly_cols - 1);
      out.emplace_back(x, y, -g.com_height);
    }
  }
  return out;
}

std::vector<BodySample> body_samples(const RobotGeometry& g, const FlipperAngles& theta) {
  std::vector<BodySample> out;
  out.reserve(std::size_t(g.belly_cols * g.belly_rows + 2 * g.track_samples +
                          4 * g.flipper_samples));
  for (const auto& p : belly_samples(g)) out.push_back({p, SampleKind::kBelly, -1});
  for (int side = 0; side < 2; ++side) {
    const double y = side == 0 ? 0.5 * g.body_width : -0.5 * g.body_width;
    for (int k = 0; k < g.track_samples; ++k) {
      const double x = -0.5 * g.body_length + g.body_length * k / (g.track_samples - 1);
      out.push_back({Eigen::Vector3d(x, y, -g.com_height), SampleKind::kTrack, side});
    }
  }
  for (int f = 0; f < 4; ++f) {
    const Eigen::Vector3d pivot = g.pivot(f);
    const Eigen::Vector3d tip = flipper_tip(g, f, theta[f]);
    for (int k = 1; k <= g.flipper_samples; ++k) {
      const double s = double(k) / g.flipper_samples;
      out.push_back({pivot + s * (tip - pivot), SampleKind::kFlipper, f});
    }
  }
  return out;
}

Eigen::Matrix3d body_rotation(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d to_world(const Pose& pose, const Eigen::Vector3d& body_point) {
  return pose.position() + body_rotation(pose.yaw, pose.pitch, pose.roll) * body_point;
}

double min_clearance(const HeightMap& map, const Pose& pose, const RobotGeometry& geometry) {
  const Eigen::Matrix3d R = body_rotation(pose.yaw, pose.pitch, pose.roll);
  double d = std::numeric_limits<double>::infinity();
  for (const auto& b : belly_samples(geometry)) {
    const Eigen::Vector3d w = pose.position() + R * b;
    d = std::min(d, w.z() - sample_height(map, w.x(), w.y()));
  }
  return std::max(d, 0.0);
}

}  // namespace flipperbench
