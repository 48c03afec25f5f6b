#include "flipperbench/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "flipperbench/error.hpp"

namespace flipperbench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kHalfPi = std::numbers::pi / 2;

double wrap_angle(double a) { return std::remainder(a, 2 * std::numbers::pi); }

FlipperAngles uniform(double v) { return FlipperAngles::Constant(v); }

}  // namespace

FlipperAngles FlipperCommand::resolve(const FlipperAngles& theta, double dt,
                                      double theta_dot_max) const {
  FlipperAngles out;
  if (form == Form::kVelocity) {
    out = values.cwiseMax(-theta_dot_max).cwiseMin(theta_dot_max);
  } else {
    const double r = std::min(rate, theta_dot_max);
    out = ((values - theta) / dt).cwiseMax(-r).cwiseMin(r);
  }
  return out;
}

// ---- modes --------------------------------------------------------------------

std::string_view to_string(ModeName mode) {
  switch (mode) {
    case ModeName::kDriveFlat: return "DRIVE_FLAT";
    case ModeName::kApproachFrontUp: return "APPROACH_FRONT_UP";
    case ModeName::kClimb: return "CLIMB";
    case ModeName::kDescent: return "DESCENT";
    case ModeName::kMaxSupport: return "MAX_SUPPORT";
  }
  return "?";
}

ModeName mode_from_string(std::string_view name) {
  for (int i = 0; i < 5; ++i) {
    if (to_string(ModeName(i)) == name) return ModeName(i);
  }
  throw ConfigError("unknown flipper mode '" + std::string(name) + "'");
}

ModeTable ModeTable::defaults() {
  auto m = [](ModeName n, double f, double r) {
    return DiscreteMode{n, FlipperAngles(f * kDeg, f * kDeg, r * kDeg, r * kDeg)};
  };
  return ModeTable{{m(ModeName::kDriveFlat, 0, 0), m(ModeName::kApproachFrontUp, -40, 0),
                    m(ModeName::kClimb, -50, 20), m(ModeName::kDescent, 40, 0),
                    m(ModeName::kMaxSupport, 40, 40)}};
}

const DiscreteMode& ModeTable::get(ModeName name) const { return modes[std::size_t(name)]; }

void ModeTable::validate() const {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].name != ModeName(i)) throw ConfigError("mode table out of order");
    if (!modes[i].targets.allFinite() || modes[i].targets.cwiseAbs().maxCoeff() > kHalfPi + 1e-12) {
      throw ConfigError("mode " + std::string(to_string(modes[i].name)) +
                        " has a target outside +-pi/2");
    }
  }
}

void PolicyConfig::validate() const {
  if (!(gain > 0)) throw ConfigError("policy gain must be > 0");
  if (!(d_d > 0)) throw ConfigError("d_d must be > 0");
  if (!(oafc_lookahead > 0)) throw ConfigError("oafc lookahead must be > 0");
  if (oafc_factor < 1) throw ConfigError("oafc factor must be >= 1");
  if (!(theta_dot_max > 0) || !(tracking_rate > 0) || !(tracking_gain > 0)) {
    throw ConfigError("flipper rates must be > 0");
  }
  const auto& a = anti_stuck;
  if (!(a.v_cmd_min > 0) || !(a.ground_speed_max > 0) || !(a.persistence > 0)) {
    throw ConfigError("anti-stuck thresholds must be > 0");
  }
  if (a.cooldown < 0) throw ConfigError("anti-stuck cooldown must be >= 0");
  modes.validate();
}

// ---- controllers --------------------------------------------------------------

double gcfc_step(double d, double d_d, double p) { return p * (d_d - d); }

std::vector<RegionCell> oafc_region(const SurfaceNormalMap& normals, const RobotState& state,
                                    Side side, const PolicyConfig& config,
                                    const RobotGeometry& geometry) {
  const int f = side == Side::kLeft ? kFrontLeft : kFrontRight;
  const Eigen::Vector3d tip = to_world(state.pose, flipper_tip(geometry, f, state.theta[f]));
  const Eigen::Vector2d fwd(std::cos(state.pose.yaw), std::sin(state.pose.yaw));
  const Eigen::Vector2d left(-fwd.y(), fwd.x());
  const Eigen::Vector2d origin = tip.head<2>();

  // The rectangle is rasterized densely; every cell hit by a sample point
  // belongs to the region.
  const double res = normals.resolution();
  const int nu = std::max(2, int(std::ceil(config.oafc_lookahead / (res / 4)))) + 1;
  const int nv = std::max(2, int(std::ceil(geometry.flipper_width / (res / 4)))) + 1;
  std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
  std::vector<RegionCell> cells;
  for (int i = 0; i < nu; ++i) {
    const double u = config.oafc_lookahead * i / (nu - 1);
    for (int j = 0; j < nv; ++j) {
      const double v = geometry.flipper_width * (double(j) / (nv - 1) - 0.5);
      const Eigen::Vector2d p = origin + u * fwd + v * left;
      const double cx = std::round((p.x() - normals.origin().x()) / res);
      const double cy = std::round((p.y() - normals.origin().y()) / res);
      if (cx < 0 || cy < 0 || cx >= double(normals.cols()) || cy >= double(normals.rows())) continue;
      const auto col = Eigen::Index(cx), row = Eigen::Index(cy);
      if (!seen.insert({row, col}).second) continue;
      const Eigen::Vector2d c = normals.cell_center(col, row);
      cells.push_back({col, row, (c - origin).norm()});
    }
  }
  return cells;
}

std::optional<double> oafc_target(const SurfaceNormalMap& normals, const RobotState& state,
                                  Side side, const PolicyConfig& config,
                                  const RobotGeometry& geometry) {
  const auto cells = oafc_region(normals, state, side, config, geometry);
  if (cells.empty()) return std::nullopt;

  const RegionCell* best = nullptr;
  double best_incl = -1;
  for (const auto& c : cells) {
    const double incl = std::acos(std::clamp(normals.nz()(c.row, c.col), -1.0, 1.0));
    bool take = best == nullptr || incl > best_incl + 1e-12;
    if (!take && std::abs(incl - best_incl) <= 1e-12) {
      if (c.distance < best->distance - 1e-12) {
        take = true;
      } else if (std::abs(c.distance - best->distance) <= 1e-12) {
        take = c.row * normals.cols() + c.col < best->row * normals.cols() + best->col;
      }
    }
    if (take) {
      best = &c;
      best_incl = incl;
    }
  }
  const double yaw = state.pose.yaw;
  const double nx = normals.nx()(best->row, best->col);
  const double ny = normals.ny()(best->row, best->col);
  const double nz = normals.nz()(best->row, best->col);
  if (nz <= 1e-9) return -kHalfPi;  // vertical face
  const double slope = -(nx * std::cos(yaw) + ny * std::sin(yaw)) / nz;
  return std::clamp(-std::atan(slope), -kHalfPi, kHalfPi);
}

FlipperCommand semi_afc(const RobotState& state, const SurfaceNormalMap& normals,
                        FrontMode front_mode, const PolicyConfig& config,
                        const RobotGeometry& geometry) {
  const double g = gcfc_step(state.clearance, config.d_d, config.gain);
  FlipperAngles rate = uniform(g);
  if (front_mode == FrontMode::kOafc) {
    for (Side side : {Side::kLeft, Side::kRight}) {
      const int f = side == Side::kLeft ? kFrontLeft : kFrontRight;
      const auto target = oafc_target(normals, state, side, config, geometry);
      rate[f] = target ? std::clamp(config.tracking_gain * (*target - state.theta[f]),
                                    -config.tracking_rate, config.tracking_rate)
                       : 0.0;
    }
  }
  return FlipperCommand::velocity(rate);
}

FlipperCommand discrete_mode_command(ModeName mode, const PolicyConfig& config) {
  return FlipperCommand::target(config.modes.get(mode).targets, config.tracking_rate);
}

FlipperCommand discrete_mode_command(std::string_view mode_name, const PolicyConfig& config) {
  return discrete_mode_command(mode_from_string(mode_name), config);
}

namespace {

void check_frame(const CommandFrame& frame, const ControllerLayout& layout) {
  if (frame.buttons.size() != layout.buttons.size() || frame.axes.size() != layout.axes.size()) {
    throw ParseError("frame has " + std::to_string(frame.buttons.size()) + " buttons and " +
                     std::to_string(frame.axes.size()) + " axes, controller has " +
                     std::to_string(layout.buttons.size()) + " and " +
                     std::to_string(layout.axes.size()));
  }
}

// Stick deflection inside the deadzone is treated as released, so motion is
// never produced by an input that the load metric does not count.
double stick(const CommandFrame& frame, const ControllerLayout& layout, const std::string& name) {
  const double a = std::clamp(frame.axes[std::size_t(layout.axis(name))], -1.0, 1.0);
  return std::abs(a) > layout.deadzone ? a : 0.0;
}

bool held(const CommandFrame& frame, const ControllerLayout& layout, const std::string& name) {
  return frame.buttons[std::size_t(layout.button(name))] != 0;
}

}  // namespace

ManualOutput manual_map(const CommandFrame& frame, const ControllerLayout& layout,
                        const MappingConfig& mapping, ManualVariant variant) {
  check_frame(frame, layout);
  ManualOutput out;
  out.v = stick(frame, layout, mapping.drive_axis) * mapping.v_max;
  out.omega = stick(frame, layout, mapping.turn_axis) * mapping.omega_max;
  out.flippers = FlipperCommand::zero();
  if (variant == ManualVariant::kContinuous) {
    const double r = stick(frame, layout, mapping.flipper_axis);
    for (int f = 0; f < 4; ++f) {
      if (held(frame, layout, mapping.flipper_modifiers[std::size_t(f)])) {
        FlipperAngles rate = FlipperAngles::Zero();
        rate[f] = r * mapping.theta_dot_max;
        out.flippers = FlipperCommand::velocity(rate);
        break;
      }
    }
  } else {
    for (int m = 0; m < 5; ++m) {
      if (held(frame, layout, mapping.mode_buttons[std::size_t(m)])) {
        out.mode_select = ModeName(m);
        break;
      }
    }
  }
  return out;
}

// ---- scripted driver ------------------------------------------------------------

ScriptedDriver::ScriptedDriver(std::vector<Eigen::Vector2d> path, Options options)
    : path_(std::move(path)), options_(options) {
  if (path_.empty()) throw ArgumentError("scripted driver needs at least one waypoint");
}

ScriptedDriver::Output ScriptedDriver::update(const Pose& pose) {
  const Eigen::Vector2d p(pose.x, pose.y);
  while (next_ < path_.size() && (path_[next_] - p).norm() < options_.capture_radius) ++next_;
  if (done()) return {0, 0, true};
  const Eigen::Vector2d d = path_[next_] - p;
  const double err = wrap_angle(std::atan2(d.y(), d.x()) - pose.yaw);
  return {options_.v_nom * std::max(0.0, std::cos(err)), options_.heading_gain * err, false};
}

// ---- classifier -------------------------------------------------------------------

ModeName RuleModeClassifier::classify(const RobotState& state, const PolicyContext& ctx) {
  const HeightMap& map = *ctx.map;
  const RobotGeometry& g = *ctx.geometry;
  const Eigen::Vector2d fwd(std::cos(state.pose.yaw), std::sin(state.pose.yaw));
  const Eigen::Vector2d c(state.pose.x, state.pose.y);
  auto h = [&](double s) {
    const Eigen::Vector2d p = c + s * fwd;
    return map.contains(p.x(), p.y()) ? sample_height(map, p.x(), p.y()) : 0.0;
  };

  // Ground reference: terrain under the rear pivots.
  const double base = h(-g.body_length / 2);
  const double front = g.body_length / 2;
  double ahead_max = -1e9, ahead_min = 1e9;
  for (double s = front; s <= front + 0.5 + 1e-9; s += 0.05) {
    ahead_max = std::max(ahead_max, h(s));
    ahead_min = std::min(ahead_min, h(s));
  }
  const double pitch = state.pose.pitch;

  if (pitch > 12 * kDeg || ahead_min < base - 0.06) return ModeName::kDescent;
  // Front half already up on something the rear has not reached yet.
  if (pitch < -12 * kDeg || h(0.0) > base + 0.04) return ModeName::kClimb;
  if (ahead_max > base + 0.04) return ModeName::kApproachFrontUp;
  return ModeName::kDriveFlat;
}

// ---- policies ---------------------------------------------------------------------

PolicyOutput ManualContinuousPolicy::act(const RobotState&, const CommandFrame& frame,
                                         const PolicyContext& ctx) {
  const auto m = manual_map(frame, *ctx.layout, mapping_, ManualVariant::kContinuous);
  return {m.v, m.omega, m.flippers, "MANUAL", false};
}

PolicyOutput ManualDiscretePolicy::act(const RobotState&, const CommandFrame& frame,
                                       const PolicyContext& ctx) {
  const auto m = manual_map(frame, *ctx.layout, mapping_, ManualVariant::kDiscrete);
  if (m.mode_select) mode_ = *m.mode_select;
  return {m.v, m.omega, discrete_mode_command(mode_, config_), std::string(to_string(mode_)), false};
}

PolicyOutput ClassifierModePolicy::act(const RobotState& state, const CommandFrame& frame,
                                       const PolicyContext& ctx) {
  const auto m = manual_map(frame, *ctx.layout, mapping_, ManualVariant::kDiscrete);
  const ModeName mode = classifier_->classify(state, ctx);
  return {m.v, m.omega, discrete_mode_command(mode, config_), std::string(to_string(mode)), false};
}

PolicyOutput SemiAfcPolicy::act(const RobotState& state, const CommandFrame& frame,
                                const PolicyContext& ctx) {
  const auto m = manual_map(frame, *ctx.layout, mapping_, ManualVariant::kDiscrete);
  const bool down = held(frame, *ctx.layout, mapping_.front_mode_toggle);
  if (down && !toggle_was_down_) front_ = front_ == FrontMode::kGcfc ? FrontMode::kOafc : FrontMode::kGcfc;
  toggle_was_down_ = down;
  return {m.v, m.omega, semi_afc(state, *ctx.normals, front_, config_, *ctx.geometry),
          front_ == FrontMode::kGcfc ? "GCFC" : "OAFC", false};
}

PolicyOutput AntiStuckPolicy::act(const RobotState& state, const CommandFrame& frame,
                                  const PolicyContext& ctx) {
  PolicyOutput out = inner_->act(state, frame, ctx);
  const auto& a = config_.anti_stuck;
  if (stuck_) {
    const double release = a.release_clearance > 0 ? a.release_clearance : config_.d_d;
    if (state.clearance >= release || state.ground_speed > 2 * a.ground_speed_max) {
      stuck_ = false;
      cooldown_left_ = a.cooldown;
    }
  } else {
    cooldown_left_ = std::max(0.0, cooldown_left_ - ctx.dt);
    if (state.v_cmd > a.v_cmd_min && state.ground_speed < a.ground_speed_max) {
      stuck_timer_ += ctx.dt;
    } else {
      stuck_timer_ = 0;
    }
    if (stuck_timer_ >= a.persistence - 1e-9 && cooldown_left_ <= 0) {
      stuck_ = true;
      stuck_timer_ = 0;
      ++activations_;
    }
  }
  if (stuck_) {
    out.flippers = FlipperCommand::target(uniform(kHalfPi), config_.tracking_rate);
    out.stuck = true;
  }
  return out;
}

const std::vector<std::string>& registered_policies() {
  static const std::vector<std::string> names{"mfc-continuous", "mfc-discrete",
                                              "mfc-discrete-antistuck", "semi-afc",
                                              "afc-discrete-antistuck-scripted"};
  return names;
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyConfig& config,
                                    const MappingConfig& mapping) {
  if (name == "mfc-continuous") return std::make_unique<ManualContinuousPolicy>(config, mapping);
  if (name == "mfc-discrete") return std::make_unique<ManualDiscretePolicy>(config, mapping);
  if (name == "mfc-discrete-antistuck") {
    return std::make_unique<AntiStuckPolicy>(
        std::make_unique<ManualDiscretePolicy>(config, mapping), config, std::string(name));
  }
  if (name == "semi-afc") return std::make_unique<SemiAfcPolicy>(config, mapping);
  if (name == "afc-discrete-antistuck-scripted") {
    return std::make_unique<AntiStuckPolicy>(
        std::make_unique<ClassifierModePolicy>(config, mapping,
                                               std::make_unique<RuleModeClassifier>()),
        config, std::string(name));
  }
  std::string list;
  for (const auto& n : registered_policies()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown policy '" + std::string(name) + "' (registered: " + list + ")");
}

}  // namespace flipperbench
