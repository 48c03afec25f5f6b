#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "fixtures.hpp"
#include "flipperbench/episode.hpp"
#include "flipperbench/policies.hpp"

using namespace flipperbench;
using fixtures::kDeg;

namespace {

// Flat ground until x = edge, then a ramp of `slope_deg` rising along +x.
HeightMap edge_ramp(double edge, double slope_deg, double res = 0.05, int cols = 100, int rows = 60) {
  HeightMap::Grid h(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) h(r, c) = std::max(0.0, res * c - edge) * std::tan(slope_deg * kDeg);
  }
  return HeightMap(res, {0.0, 0.0}, h);
}

RobotState state_at(double x, double y, double yaw, double pitch = 0.0) {
  RobotState s;
  s.pose.x = x;
  s.pose.y = y;
  s.pose.yaw = yaw;
  s.pose.pitch = pitch;
  return s;
}

CommandFrame frame_with(const ControllerLayout& layout, std::initializer_list<std::pair<const char*, double>> axes,
                        std::initializer_list<const char*> buttons) {
  CommandFrame f = layout.neutral(0.0);
  for (const auto& [name, v] : axes) f.axes[std::size_t(layout.axis(name))] = v;
  for (const auto* name : buttons) f.buttons[std::size_t(layout.button(name))] = 1;
  return f;
}

// Runs the wrapper and a separate copy of the inner policy on the same inputs
// and counts ticks where their outputs differ.
class TeePolicy : public Policy {
 public:
  TeePolicy(std::unique_ptr<Policy> wrapped, std::unique_ptr<Policy> bare)
      : wrapped_(std::move(wrapped)), bare_(std::move(bare)) {}
  PolicyOutput act(const RobotState& s, const CommandFrame& f, const PolicyContext& ctx) override {
    const auto a = wrapped_->act(s, f, ctx);
    const auto b = bare_->act(s, f, ctx);
    ++ticks;
    if (!(a.v == b.v && a.omega == b.omega && a.flippers == b.flippers && a.mode == b.mode && !a.stuck)) ++diffs;
    return a;
  }
  std::string name() const override { return wrapped_->name(); }
  int ticks = 0, diffs = 0;

 private:
  std::unique_ptr<Policy> wrapped_, bare_;
};

}  // namespace

TEST_CASE("gcfc_step") {
  CHECK(gcfc_step(0.08, 0.08, 2.0) == 0.0);
  CHECK(gcfc_step(0.03, 0.08, 2.0) == doctest::Approx(0.10));
  CHECK(gcfc_step(0.12, 0.08, 2.0) == doctest::Approx(-0.08));
}

TEST_CASE("oafc_target") {
  const RobotGeometry g;
  const PolicyConfig pc;
  SUBCASE("flat region") {
    const auto n = compute_normals(HeightMap(0.2, {0.0, 0.0}, HeightMap::Grid::Zero(20, 30)));
    const auto t = oafc_target(n, state_at(2.0, 2.0, 0.3), Side::kLeft, pc, g);
    REQUIRE(t);
    CHECK(*t == 0.0);
  }
  SUBCASE("30 degree ramp ahead") {
    const auto n = compute_normals(downsample(edge_ramp(0.5, 30.0), 4));
    for (Side side : {Side::kLeft, Side::kRight}) {
      const auto t = oafc_target(n, state_at(0.8, 1.5, 0.0, -30 * kDeg), side, pc, g);
      REQUIRE(t);
      CHECK(std::abs(*t + 30 * kDeg) <= 1 * kDeg);
    }
  }
  SUBCASE("one 45 degree cell among flat ones decides") {
    const int rows = 20, cols = 30;
    SurfaceNormalMap::Grid nx = SurfaceNormalMap::Grid::Zero(rows, cols);
    SurfaceNormalMap::Grid ny = nx, nz = SurfaceNormalMap::Grid::Ones(rows, cols);
    const SurfaceNormalMap flat(0.1, {0.0, 0.0}, nx, ny, nz);
    const auto s = state_at(1.0, 1.0, 0.0);
    const auto region = oafc_region(flat, s, Side::kLeft, pc, g);
    REQUIRE(region.size() > 3);
    const auto pick = region[region.size() / 2];
    nx(pick.row, pick.col) = -std::sin(45 * kDeg);
    nz(pick.row, pick.col) = std::cos(45 * kDeg);
    const SurfaceNormalMap one(0.1, {0.0, 0.0}, nx, ny, nz);
    const auto t = oafc_target(one, s, Side::kLeft, pc, g);
    REQUIRE(t);
    CHECK(*t == doctest::Approx(-45 * kDeg));
  }
  SUBCASE("region off the map") {
    const auto n = compute_normals(HeightMap(0.2, {0.0, 0.0}, HeightMap::Grid::Zero(10, 10)));
    CHECK_FALSE(oafc_target(n, state_at(5.0, 1.0, 0.0), Side::kLeft, pc, g));
  }
}

TEST_CASE("semi_afc") {
  const RobotGeometry g;
  const PolicyConfig pc;
  SUBCASE("GCFC at the desired clearance holds still") {
    const auto n = compute_normals(HeightMap(0.2, {0.0, 0.0}, HeightMap::Grid::Zero(20, 30)));
    auto s = state_at(2.0, 2.0, 0.0);
    s.clearance = pc.d_d;
    const auto cmd = semi_afc(s, n, FrontMode::kGcfc, pc, g);
    CHECK(cmd.form == FlipperCommand::Form::kVelocity);
    CHECK(cmd.values == FlipperAngles::Zero());
  }
  SUBCASE("OAFC facing a ramp, flat underneath") {
    const auto n = compute_normals(downsample(edge_ramp(1.3, 30.0), 4));
    auto s = state_at(1.0, 1.5, 0.0);
    s.clearance = 0.05;
    const auto cmd = semi_afc(s, n, FrontMode::kOafc, pc, g);
    const double rear = gcfc_step(0.05, pc.d_d, pc.gain);
    CHECK(cmd.values[kRearLeft] == rear);
    CHECK(cmd.values[kRearRight] == rear);
    for (Side side : {Side::kLeft, Side::kRight}) {
      const auto t = oafc_target(n, s, side, pc, g);
      REQUIRE(t);
      CHECK(std::abs(*t + 30 * kDeg) <= 1 * kDeg);
    }
    CHECK(cmd.values[kFrontLeft] < 0.0);  // raising toward the face
    CHECK(cmd.values[kFrontLeft] == cmd.values[kFrontRight]);
  }
  SUBCASE("yawed against a ramp edge the two sides differ") {
    const double yaw = 45 * kDeg;
    auto s = state_at(1.5, 1.5, yaw);
    // Edge just behind the right tip: the right region is all ramp, the left
    // region reaches the edge only with its far corner.
    const double right_x = to_world(s.pose, flipper_tip(g, kFrontRight, 0.0)).x();
    const double edge = right_x - 0.01;
    const auto n = compute_normals(edge_ramp(edge, 30.0, 0.05));
    s.clearance = pc.d_d;
    const auto tl = oafc_target(n, s, Side::kLeft, pc, g);
    const auto tr = oafc_target(n, s, Side::kRight, pc, g);
    REQUIRE(tl);
    REQUIRE(tr);
    CHECK(*tl != *tr);
    // Brute force: steepest cell of each region, slope along the heading.
    for (auto [side, got] : {std::pair{Side::kLeft, *tl}, std::pair{Side::kRight, *tr}}) {
      double best = -1, slope = 0;
      for (const auto& c : oafc_region(n, s, side, pc, g)) {
        const auto v = n.at(c.col, c.row);
        if (std::acos(v.z()) > best + 1e-12) {
          best = std::acos(v.z());
          slope = -(v.x() * std::cos(yaw) + v.y() * std::sin(yaw)) / v.z();
        }
      }
      CHECK(got == doctest::Approx(-std::atan(slope)));
    }
    const auto cmd = semi_afc(s, n, FrontMode::kOafc, pc, g);
    CHECK(cmd.values[kFrontLeft] != cmd.values[kFrontRight]);
  }
}

TEST_CASE("discrete_mode_command") {
  const PolicyConfig pc;
  CHECK(discrete_mode_command("DRIVE_FLAT", pc).values == FlipperAngles::Zero());
  const auto climb = discrete_mode_command(ModeName::kClimb, pc);
  CHECK(climb.form == FlipperCommand::Form::kTarget);
  CHECK(climb.values[kFrontLeft] == doctest::Approx(-50 * kDeg));
  CHECK(climb.values[kFrontRight] == doctest::Approx(-50 * kDeg));
  CHECK(climb.values[kRearLeft] == doctest::Approx(20 * kDeg));
  CHECK(climb.values[kRearRight] == doctest::Approx(20 * kDeg));
  const auto max_support = discrete_mode_command("MAX_SUPPORT", pc);
  for (int i = 0; i < 4; ++i) CHECK(max_support.values[i] == doctest::Approx(40 * kDeg));
  CHECK_THROWS_AS(discrete_mode_command("FLY", pc), ConfigError);

  // Tracking reaches the targets exactly and then stops.
  FlipperAngles theta = FlipperAngles::Zero();
  for (int i = 0; i < 100; ++i) theta += climb.resolve(theta, 0.02, pc.theta_dot_max) * 0.02;
  CHECK((theta - climb.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(climb.resolve(climb.values, 0.02, pc.theta_dot_max) == FlipperAngles::Zero());
}

TEST_CASE("anti-stuck wrapper is transparent on flat ground") {
  const auto ctx = make_context(fixtures::flat_arena(), RobotGeometry{});
  for (const char* inner : {"mfc-discrete", "semi-afc"}) {
    CAPTURE(inner);
    TeePolicy tee(std::make_unique<AntiStuckPolicy>(make_policy(inner, ctx.policy, ctx.mapping), ctx.policy),
                  make_policy(inner, ctx.policy, ctx.mapping));
    fixtures::ForwardOperator forward(0.5);
    EpisodeConfig ec;
    ec.start_pose = Eigen::Vector3d(0.0, 0.0, 0.0);
    const auto log = run_episode(ec, tee, forward, ctx);
    CHECK(log.footer.status == EpisodeStatus::kCompleted);
    CHECK(tee.ticks > 100);
    CHECK(tee.diffs == 0);
  }
}

TEST_CASE("anti-stuck on the tall pallet: enters, frees, re-enters") {
  const auto ctx = make_context(fixtures::tall_pallet_arena(), RobotGeometry{});
  AntiStuckPolicy policy(std::make_unique<ManualDiscretePolicy>(ctx.policy, ctx.mapping), ctx.policy);
  fixtures::ForwardOperator forward(0.5);
  EpisodeConfig ec;
  ec.start_pose = Eigen::Vector3d(0.0, 0.0, 0.0);
  ec.max_duration = 20.0;
  double entry = -1, moving_after = -1;
  bool pressed_down = false;
  run_episode(ec, policy, forward, ctx, [&](const RobotState& s, const PolicyOutput& out) {
    if (out.stuck && entry < 0) entry = s.t;
    if (out.stuck && out.flippers.form == FlipperCommand::Form::kTarget &&
        out.flippers.values == FlipperAngles::Constant(ctx.geometry.flipper_limit)) {
      pressed_down = true;
    }
    if (entry >= 0 && moving_after < 0 && s.ground_speed > 0) moving_after = s.t - entry;
    return true;
  });
  CHECK(entry > 0);
  CHECK(pressed_down);
  CHECK(moving_after >= 0);
  CHECK(moving_after <= 5.0);
  CHECK(policy.activations() >= 2);
}

TEST_CASE("manual_map") {
  const auto layout = ControllerLayout::gamepad();
  const MappingConfig m;
  SUBCASE("neutral") {
    const auto out = manual_map(layout.neutral(0.0), layout, m, ManualVariant::kContinuous);
    CHECK(out.v == 0.0);
    CHECK(out.omega == 0.0);
    CHECK(out.flippers.values == FlipperAngles::Zero());
    CHECK_FALSE(out.mode_select);
  }
  SUBCASE("drive stick") {
    const auto out = manual_map(frame_with(layout, {{"LY", 1.0}, {"LX", -0.5}}, {}), layout, m,
                                ManualVariant::kContinuous);
    CHECK(out.v == doctest::Approx(0.6));
    CHECK(out.omega == doctest::Approx(-0.5));
  }
  SUBCASE("flipper stick with L1 drives the front-left flipper only") {
    const auto out =
        manual_map(frame_with(layout, {{"RY", -0.5}}, {"L1"}), layout, m, ManualVariant::kContinuous);
    CHECK(out.flippers.values == FlipperAngles(-0.75, 0.0, 0.0, 0.0));
  }
  SUBCASE("flipper stick without a modifier does nothing") {
    const auto out = manual_map(frame_with(layout, {{"RY", 1.0}}, {}), layout, m, ManualVariant::kContinuous);
    CHECK(out.flippers.values == FlipperAngles::Zero());
  }
  SUBCASE("face buttons select modes in the discrete variant") {
    const auto out = manual_map(frame_with(layout, {{"LY", 0.5}}, {"X"}), layout, m, ManualVariant::kDiscrete);
    REQUIRE(out.mode_select);
    CHECK(*out.mode_select == ModeName::kClimb);
    CHECK(out.v == doctest::Approx(0.3));
  }
  SUBCASE("wrong frame width") {
    CommandFrame f = layout.neutral(0.0);
    f.axes.pop_back();
    CHECK_THROWS_AS(manual_map(f, layout, m, ManualVariant::kContinuous), ParseError);
  }
}

TEST_CASE("scripted_driver") {
  SUBCASE("aligned with the path") {
    ScriptedDriver d({{5.0, 0.0}});
    const auto out = d.update(Pose{0.0, 0.0, 0.0});
    CHECK(out.v == doctest::Approx(0.3));
    CHECK(out.omega == doctest::Approx(0.0));
    CHECK_FALSE(out.done);
  }
  SUBCASE("waypoint off to the left") {
    ScriptedDriver d({{0.0, 5.0}});
    const auto out = d.update(Pose{0.0, 0.0, 0.0});
    CHECK(out.v == doctest::Approx(0.0));
    CHECK(out.omega == doctest::Approx(1.5 * std::numbers::pi / 2));
  }
  SUBCASE("final waypoint captured") {
    ScriptedDriver d({{1.0, 0.0}, {2.0, 0.0}});
    d.update(Pose{0.9, 0.0, 0.0});
    const auto out = d.update(Pose{1.9, 0.05, 0.0});
    CHECK(out.done);
    CHECK(out.v == 0.0);
    CHECK(out.omega == 0.0);
    CHECK(d.done());
  }
}

TEST_CASE("policy registry") {
  const auto& names = registered_policies();
  CHECK(names.size() == 5);
  for (const auto& n : names) CHECK(make_policy(n, PolicyConfig{}, MappingConfig{})->name() == n);
}
