#include "flipperbench/sim.hpp"

#include <algorithm>
#include <cmath>

#include "flipperbench/error.hpp"

namespace flipperbench {

namespace {

void apply_settle(RobotState& s, const SettleResult& r, const HeightMap& map,
                  const RobotGeometry& geometry) {
  s.pose.z = r.z;
  s.pose.pitch = r.pitch;
  s.pose.roll = r.roll;
  s.belly_contacts = r.contacts.belly_contacts;
  s.belly_loaded = r.contacts.belly_loaded;
  s.track_contacts = r.contacts.track_contacts;
  s.track_total = r.contacts.track_total;
  s.clearance = min_clearance(map, s.pose, geometry);
}

}  // namespace

double traction(const RobotState& state, double traction_fraction) {
  if (!state.belly_loaded) return 1.0;
  const double k_track = traction_fraction * state.track_total;
  return state.track_contacts >= k_track ? 0.5 : 0.0;
}

RobotState initial_state(const HeightMap& map, double x, double y, double yaw,
                         const FlipperAngles& theta, const RobotGeometry& geometry,
                         const SimOptions& options) {
  RobotState s;
  s.pose.x = x;
  s.pose.y = y;
  s.pose.yaw = yaw;
  s.theta = theta.cwiseMax(-geometry.flipper_limit).cwiseMin(geometry.flipper_limit);
  apply_settle(s, settle_pose(map, x, y, yaw, s.theta, geometry, options.settle), map, geometry);
  const Eigen::Matrix3d R = body_rotation(yaw, s.pose.pitch, s.pose.roll);
  s.accel = R.transpose() * Eigen::Vector3d(0, 0, kGravity);
  s.prev_position = s.pose.position();
  s.has_prev = false;
  return s;
}

RobotState step(const RobotState& state, const ActuatorCommand& cmd, double dt,
                const HeightMap& map, const RobotGeometry& geometry, const SimOptions& options) {
  if (!(dt > 0) || dt > 0.1) throw ArgumentError("step dt must be in (0, 0.1]");
  RobotState next = state;
  next.t = state.t + dt;
  next.v_cmd = cmd.v;
  next.omega_cmd = cmd.omega;
  next.theta = (state.theta + cmd.theta_dot * dt)
                   .cwiseMax(-geometry.flipper_limit)
                   .cwiseMin(geometry.flipper_limit);

  const double tau = traction(state, options.traction_fraction);
  const double yaw = state.pose.yaw;
  next.pose.x = state.pose.x + tau * cmd.v * std::cos(yaw) * dt;
  next.pose.y = state.pose.y + tau * cmd.v * std::sin(yaw) * dt;
  next.pose.yaw = yaw + tau * cmd.omega * dt;

  SettleOptions so = options.settle;
  so.initial_pitch_roll = Eigen::Vector2d(state.pose.pitch, state.pose.roll);
  apply_settle(next, settle_pose(map, next.pose.x, next.pose.y, next.pose.yaw, next.theta, geometry, so),
               map, geometry);

  next.ground_speed = std::hypot(next.pose.x - state.pose.x, next.pose.y - state.pose.y) / dt;

  Eigen::Vector3d kinematic = Eigen::Vector3d::Zero();
  if (state.has_prev) {
    kinematic = (next.pose.position() - 2.0 * state.pose.position() + state.prev_position) / (dt * dt);
  }
  const Eigen::Matrix3d R = body_rotation(next.pose.yaw, next.pose.pitch, next.pose.roll);
  next.accel = R.transpose() * (kinematic + Eigen::Vector3d(0, 0, kGravity));
  next.prev_position = state.pose.position();
  next.has_prev = true;
  return next;
}

}  // namespace flipperbench
