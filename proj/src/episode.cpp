#include "flipperbench/episode.hpp"

#include <algorithm>
#include <cmath>

#include "flipperbench/error.hpp"

namespace flipperbench {

PolicyContext SimContext::policy_context(double dt) const {
  return PolicyContext{&map, &normals, &geometry, &layout, dt};
}

SimContext make_context(ArenaSpec arena, RobotGeometry geometry, PolicyConfig policy,
                        MappingConfig mapping, ControllerLayout layout, SimOptions sim) {
  arena.validate();
  geometry.validate();
  policy.d_d = geometry.clearance;
  policy.validate();
  HeightMap map = build_arena(arena);
  SurfaceNormalMap normals = compute_normals(downsample(map, policy.oafc_factor));
  return SimContext{std::move(arena), std::move(map), std::move(normals), std::move(geometry),
                    std::move(layout), std::move(sim), std::move(policy), std::move(mapping)};
}

// ---- operator sources ----------------------------------------------------------

RecordedOperator::RecordedOperator(const std::vector<CommandFrame>& frames) {
  for (const auto& f : frames) frames_.push_back({f, f.t});
}

std::vector<LoggedFrame> RecordedOperator::poll(const RobotState& state, const SimContext&) {
  std::vector<LoggedFrame> out;
  while (next_ < frames_.size() && frames_[next_].rx <= state.t + 1e-12) {
    out.push_back(frames_[next_]);
    ++next_;
  }
  return out;
}

namespace {

std::vector<Eigen::Vector2d> line_path(const TraversalLine& line, double from, double to) {
  std::vector<Eigen::Vector2d> path;
  for (double s = from + 0.5; s < to; s += 0.5) path.push_back(line.point_at(s));
  path.push_back(line.point_at(to));
  return path;
}

}  // namespace

ScriptedOperator::ScriptedOperator(std::string method, const SimContext& ctx, double start_arc,
                                   double end_arc, std::uint64_t seed, Options options)
    : method_(std::move(method)),
      options_(options),
      driver_(line_path(ctx.arena.line, start_arc, end_arc + 1.0), options.driver),
      rng_(seed) {
  for (std::size_t i = 0; i < ctx.arena.obstacles.size(); ++i) {
    const auto [lo, hi] = ctx.arena.obstacle_extent(i);
    oafc_windows_.emplace_back(lo - options_.oafc_lead, hi + options_.oafc_trail);
  }
}

double ScriptedOperator::uniform01() {
  // Explicit conversion keeps the stream identical across standard libraries.
  return double(rng_() >> 11) * 0x1.0p-53;
}

ModeName ScriptedOperator::desired_mode(const RobotState& state, const SimContext& ctx) {
  const ModeName c = classifier_.classify(state, ctx.policy_context(0.0));
  if (c != seen_mode_) {
    seen_mode_ = c;
    react_at_ = state.t + options_.reaction_min +
                (options_.reaction_max - options_.reaction_min) * uniform01();
  }
  if (seen_mode_ != acted_mode_ && state.t >= react_at_) acted_mode_ = seen_mode_;
  return acted_mode_;
}

std::vector<LoggedFrame> ScriptedOperator::poll(const RobotState& state, const SimContext& ctx) {
  const auto& layout = ctx.layout;
  const auto& mapping = ctx.mapping;
  CommandFrame f = layout.neutral(state.t);

  const auto drive = driver_.update(state.pose);
  f.axes[std::size_t(layout.axis(mapping.drive_axis))] = std::clamp(drive.v / mapping.v_max, -1.0, 1.0);
  f.axes[std::size_t(layout.axis(mapping.turn_axis))] =
      std::clamp(drive.omega / mapping.omega_max, -1.0, 1.0);

  auto press = [&](const std::string& name) { f.buttons[std::size_t(layout.button(name))] = 1; };

  // With free control of every flipper the operator handles a stall: all
  // flippers down until the belly is clear. The discrete operator can only
  // pick a mode, and that is what the anti-stuck variants add.
  if (state.ground_speed >= options_.stall_speed) moving_at_ = state.t;
  if (state.t - moving_at_ >= options_.stall_release) recovering_ = true;
  if (state.clearance >= ctx.geometry.clearance) recovering_ = false;
  const bool recover = recovering_;
  if (method_ == "mfc-continuous") {
    const ModeName mode = desired_mode(state, ctx);
    const FlipperAngles target = recover ? FlipperAngles::Constant(ctx.geometry.flipper_limit)
                                         : ctx.policy.modes.get(mode).targets;
    const FlipperAngles err = target - state.theta;
    int worst = 0;
    err.cwiseAbs().maxCoeff(&worst);
    if (std::abs(err[worst]) > options_.flipper_tolerance) {
      press(mapping.flipper_modifiers[std::size_t(worst)]);
      const double k = 4.0 * err[worst] / mapping.theta_dot_max;
      const double mag = std::clamp(std::abs(k), 1.5 * layout.deadzone, 1.0);
      f.axes[std::size_t(layout.axis(mapping.flipper_axis))] = std::copysign(mag, err[worst]);
    }
  } else if (method_ == "mfc-discrete" || method_ == "mfc-discrete-antistuck") {
    ModeName mode = desired_mode(state, ctx);
    if (mode != sent_mode_ && state.t >= press_until_) {
      sent_mode_ = mode;
      press_until_ = state.t + options_.press_duration;
    }
    if (state.t < press_until_) press(mapping.mode_buttons[std::size_t(sent_mode_)]);
  } else if (method_ == "semi-afc") {
    // The window applies to the front pivots, which is where OAFC looks.
    const double s = ctx.arena.line.arc_length(state.pose.x, state.pose.y) + ctx.geometry.body_length / 2;
    int window = -1;
    for (std::size_t i = 0; i < oafc_windows_.size(); ++i) {
      if (s >= oafc_windows_[i].first && s <= oafc_windows_[i].second) window = int(i);
    }
    // A stalled robot gets the front back on ground contact for the rest of
    // this obstacle, as an operator would.
    if (window >= 0 && front_oafc_ && state.t - moving_at_ >= options_.stall_release) gave_up_ = window;
    const bool want = window >= 0 && window != gave_up_;
    if (toggle_down_) {
      toggle_down_ = false;
    } else if (want != front_oafc_) {
      press(mapping.front_mode_toggle);
      toggle_down_ = true;
      front_oafc_ = want;
    }
  }
  return {LoggedFrame{std::move(f), state.t}};
}

// ---- runner ------------------------------------------------------------------------

namespace {

std::vector<const ObstacleSector*> target_sectors(const EpisodeConfig& config,
                                                  const ArenaSpec& arena) {
  std::vector<const ObstacleSector*> out;
  if (config.targets.empty()) {
    for (const auto& s : arena.sectors) out.push_back(&s);
  } else {
    for (int id : config.targets) out.push_back(&arena.sector(id));
    std::sort(out.begin(), out.end(),
              [](const auto* a, const auto* b) { return a->start < b->start; });
  }
  if (out.empty()) throw ConfigError("episode has no target sectors");
  return out;
}

TickRecord record_of(const RobotState& s) {
  TickRecord r;
  r.t = s.t;
  r.pose = s.pose;
  r.theta = s.theta;
  r.v_cmd = s.v_cmd;
  r.omega_cmd = s.omega_cmd;
  r.ground_speed = s.ground_speed;
  r.clearance = s.clearance;
  r.accel = s.accel;
  return r;
}

}  // namespace

double episode_start_arc(const EpisodeConfig& config, const ArenaSpec& arena) {
  return target_sectors(config, arena).front()->start - config.start_offset;
}

double episode_end_arc(const EpisodeConfig& config, const ArenaSpec& arena) {
  double end = -1e300;
  for (const auto* s : target_sectors(config, arena)) end = std::max(end, s->end);
  return end;
}

EpisodeLog run_episode(const EpisodeConfig& config, Policy& policy, OperatorSource& source,
                       const SimContext& ctx, const TickObserver& observer) {
  if (!(config.dt > 0) || config.dt > 0.1) throw ConfigError("dt must be in (0, 0.1]");
  if (!(config.sector_timeout > 0)) throw ConfigError("sector timeout must be > 0");
  const auto targets = target_sectors(config, ctx.arena);
  const double start_arc = episode_start_arc(config, ctx.arena);
  const double end_arc = episode_end_arc(config, ctx.arena);
  const auto& line = ctx.arena.line;

  EpisodeLog log;
  auto& h = log.header;
  h.method = config.method.empty() ? policy.name() : config.method;
  h.arena_id = ctx.arena.id;
  h.arena_hash = ctx.arena.hash();
  h.geometry_hash = ctx.geometry.hash();
  h.dt = config.dt;
  h.start_time = config.start_time;
  h.d_d = ctx.geometry.clearance;
  h.line = line;
  h.sectors = ctx.arena.sectors;
  for (const auto* s : targets) h.targets.push_back(s->id);
  h.buttons = ctx.layout.buttons;
  h.axes = ctx.layout.axes;
  h.deadzone = ctx.layout.deadzone;
  h.seed = config.seed;

  auto finish = [&](EpisodeStatus status, std::string reason, double t) {
    log.footer.status = status;
    log.footer.reason = std::move(reason);
    log.footer.sim_duration = t;
    return log;
  };

  const Eigen::Vector2d left(-line.direction().y(), line.direction().x());
  Eigen::Vector3d start;
  if (config.start_pose) {
    start = *config.start_pose;
  } else {
    const Eigen::Vector2d p0 = line.point_at(start_arc) + config.lateral_offset * left;
    start = Eigen::Vector3d(p0.x(), p0.y(), line.heading + config.start_yaw);
  }
  RobotState state;
  try {
    state = initial_state(ctx.map, start.x(), start.y(), start.z(), config.initial_theta,
                          ctx.geometry, ctx.sim);
  } catch (const BoundsError& e) {
    throw ConfigError(std::string("start pose is off the map: ") + e.what());
  }
  log.ticks.push_back(record_of(state));

  const PolicyContext pctx = ctx.policy_context(config.dt);
  CommandFrame latest = ctx.layout.neutral(0.0);
  std::size_t next_target = 0;
  double last_entry = 0.0;

  for (;;) {
    if (source.stopped()) return finish(EpisodeStatus::kAborted, "operator stop", state.t);

    auto frames = source.poll(state, ctx);
    auto& rec = log.ticks.back();
    for (auto& lf : frames) {
      latest = lf.frame;
      rec.cmds.push_back(std::move(lf));
    }
    const PolicyOutput out = policy.act(state, latest, pctx);
    rec.v_cmd = out.v;
    rec.omega_cmd = out.omega;
    rec.mode = out.mode;
    rec.stuck = out.stuck;

    ActuatorCommand cmd;
    cmd.v = out.v;
    cmd.omega = out.omega;
    cmd.theta_dot = out.flippers.resolve(state.theta, config.dt, ctx.policy.theta_dot_max);
    try {
      state = step(state, cmd, config.dt, ctx.map, ctx.geometry, ctx.sim);
    } catch (const SettleError& e) {
      return finish(EpisodeStatus::kFailed, std::string("settle: ") + e.what(), state.t);
    } catch (const BoundsError&) {
      return finish(EpisodeStatus::kFailed, "out of bounds", state.t);
    }
    log.ticks.push_back(record_of(state));
    log.ticks.back().mode = out.mode;
    log.ticks.back().stuck = out.stuck;
    if (observer && !observer(state, out)) {
      return finish(EpisodeStatus::kAborted, "operator disconnected", state.t);
    }

    const double s = line.arc_length(state.pose.x, state.pose.y);
    while (next_target < targets.size() && s >= targets[next_target]->start) {
      last_entry = state.t;
      ++next_target;
    }
    if (std::abs(state.pose.pitch) > config.capsize_limit ||
        std::abs(state.pose.roll) > config.capsize_limit) {
      return finish(EpisodeStatus::kFailed, "capsize", state.t);
    }
    if (s >= end_arc) return finish(EpisodeStatus::kCompleted, "", state.t);
    if (state.t - last_entry > config.sector_timeout) {
      return finish(EpisodeStatus::kFailed, "timeout", state.t);
    }
    if (config.max_duration > 0 && state.t >= config.max_duration) {
      return finish(EpisodeStatus::kFailed, "timeout", state.t);
    }
  }
}

EpisodeLog run_scripted(const EpisodeConfig& config, const SimContext& ctx,
                        const ScriptedOperator::Options& options) {
  auto policy = make_policy(config.method, ctx.policy, ctx.mapping);
  ScriptedOperator op(config.method, ctx, episode_start_arc(config, ctx.arena),
                      episode_end_arc(config, ctx.arena), config.seed, options);
  return run_episode(config, *policy, op, ctx);
}

}  // namespace flipperbench
