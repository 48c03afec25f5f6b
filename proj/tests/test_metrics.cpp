#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "flipperbench/metrics.hpp"

using namespace flipperbench;
using namespace fixtures;

TEST_CASE("sigmoid_norm") {
  CHECK(sigmoid_norm(0.0, 0.3) == 1.0);
  CHECK(sigmoid_norm(0.0, 70.0) == 1.0);
  CHECK(sigmoid_norm(2.5, 2.5) == doctest::Approx(0.537883).epsilon(1e-6));
  CHECK(sigmoid_norm(5.0, 2.5) == doctest::Approx(0.238406).epsilon(1e-6));
  CHECK_THROWS_AS(sigmoid_norm(1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(sigmoid_norm(1.0, -2.0), ArgumentError);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 20.0), k(0.01, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng), ref = 1.0 + u(rng), s = k(rng);
    const double n = sigmoid_norm(x, ref);
    CHECK(n > 0.0);
    CHECK(n <= 1.0);
    CHECK(sigmoid_norm(s * x, s * ref) == doctest::Approx(n).epsilon(1e-12));
  }
}

TEST_CASE("linear_norm") {
  CHECK(linear_norm(0.0, 0.08) == 0.0);
  CHECK(linear_norm(0.08, 0.08) == 1.0);
  CHECK(linear_norm(0.12, 0.08) == 1.0);
  CHECK(linear_norm(-0.01, 0.08) == 0.0);
  CHECK(linear_norm(0.04, 0.08) == doctest::Approx(0.5));
  CHECK_THROWS_AS(linear_norm(0.1, 0.0), ArgumentError);
}

TEST_CASE("cognitive_load") {
  SUBCASE("nothing pressed") {
    CHECK(cognitive_load(frames_with_counts({0.0, 0.5, 1.0, 3.0}, {0, 0, 0, 0}), 0.1) == 0.0);
  }
  SUBCASE("hand example") {
    CHECK(cognitive_load(frames_with_counts({0.0, 0.1, 0.2, 0.3}, {4, 2, 1, 0}), 0.1) ==
          doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("held button") {
    std::vector<double> t;
    for (int i = 0; i <= 500; ++i) t.push_back(i * 0.02);
    CHECK(cognitive_load(frames_with_counts(t, std::vector<int>(t.size(), 1)), 0.1) ==
          doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("axes count beyond the deadzone") {
    auto frames = frames_with_counts({0.0, 1.0, 2.0}, {0, 0, 0});
    for (auto& f : frames) f.axes = {0.05, -0.5};
    CHECK(cognitive_load(frames, 0.1) == doctest::Approx(2.0));
  }
  SUBCASE("timestamps must increase") {
    CHECK_THROWS_AS(cognitive_load(frames_with_counts({0.0, 0.2, 0.1}, {0, 1, 1}), 0.1), ValidationError);
    CHECK_THROWS_AS(cognitive_load(frames_with_counts({0.0, 0.0}, {0, 1}), 0.1), ValidationError);
  }
}

TEST_CASE("shock") {
  CHECK(shock({0, 0, 0}) == 0.0);
  CHECK(shock({3, 4, 0}) == 5.0);
  CHECK(shock({0, 0, 9.81}) == 9.81);
}

TEST_CASE("window_reduce") {
  SUBCASE("hand partition") {
    const std::vector<ArcSample> s{{0.0, 1}, {1.0, 3}, {2.0, 2}, {3.0, 5}};
    CHECK(window_reduce(s, 0.0, 4.0, 2, Reducer::kMax) == std::vector<double>{3, 5});
    CHECK(window_reduce(s, 0.0, 4.0, 2, Reducer::kMin) == std::vector<double>{1, 2});
  }
  SUBCASE("constant") {
    std::vector<ArcSample> s;
    for (double a : span(0.0, 2.99, 300)) s.push_back({a, 0.7});
    CHECK(window_reduce(s, 0.0, 3.0, 10, Reducer::kMax) == std::vector<double>(10, 0.7));
    CHECK(window_reduce(s, 0.0, 3.0, 10, Reducer::kMin) == std::vector<double>(10, 0.7));
  }
  SUBCASE("a single touch shows up in its window") {
    std::vector<ArcSample> s;
    for (double a : span(0.0, 0.99, 100)) s.push_back({a, 0.08});
    s[25].value = 0.0;  // arc 0.25, window 3
    const auto w = window_reduce(s, 0.0, 1.0, 10, Reducer::kMin);
    CHECK(w[2] == 0.0);
    for (int i = 0; i < 10; ++i) {
      if (i != 2) CHECK(w[std::size_t(i)] == 0.08);
    }
  }
  SUBCASE("empty window names it") {
    const std::vector<ArcSample> s{{0.05, 1}, {0.95, 1}};
    try {
      window_reduce(s, 0.0, 1.0, 10, Reducer::kMax);
      FAIL("expected ScoringError");
    } catch (const ScoringError& e) {
      CHECK(std::string(e.what()).find("window 2") != std::string::npos);
    }
  }
}

TEST_CASE("sector_slices") {
  const auto sectors = contiguous_sectors(13, 3.0);
  SUBCASE("full run") {
    const auto groups = sector_slices(line_log(span(-1.0, 40.0, 2000), sectors));
    REQUIRE(groups.size() == 13);
    for (const auto& g : groups) {
      CHECK(g.entered);
      CHECK(g.traversed);
      CHECK(g.shock.size() > 100);
      CHECK(g.frames.size() == g.shock.size() + 1);
    }
  }
  SUBCASE("run ending inside sector 5") {
    const auto groups = sector_slices(line_log(span(-1.0, 13.5, 800), sectors));
    for (int i = 0; i < 4; ++i) CHECK(groups[std::size_t(i)].traversed);
    CHECK(groups[4].entered);
    CHECK_FALSE(groups[4].traversed);
    for (int i = 5; i < 13; ++i) {
      CHECK_FALSE(groups[std::size_t(i)].entered);
      CHECK_FALSE(groups[std::size_t(i)].traversed);
    }
  }
  SUBCASE("boundary tick goes to the sector that starts there") {
    const auto groups = sector_slices(line_log({2.5, 3.0, 3.5}, contiguous_sectors(2, 3.0)));
    REQUIRE(groups[0].shock.size() == 1);
    CHECK(groups[0].shock[0].arc == 2.5);
    REQUIRE(groups[1].shock.size() == 2);
    CHECK(groups[1].shock[0].arc == 3.0);
  }
  SUBCASE("ticks between sectors are dropped") {
    std::vector<ObstacleSector> gap{{1, 0.0, 1.0, 10}, {2, 2.0, 3.0, 10}};
    const auto groups = sector_slices(line_log(span(0.0, 3.5, 36), gap));
    CHECK(groups[0].shock.size() == 10);
    CHECK(groups[1].shock.size() == 10);
  }
}

TEST_CASE("score_sector") {
  const ObstacleSector sector{1, 0.0, 1.0, 10};
  CalibrationTable calib;
  calib.cl_min[1] = 1.0;
  calib.d_d = 0.08;
  // Constant gravity shock; pick s_max so every window normalizes to 0.74.
  const double u = std::log(2.0 / 0.74 - 1.0);
  calib.s_max = 2 * kGravity / u;

  auto log = line_log(span(-0.1, 1.2, 131), {sector});
  for (auto& t : log.ticks) {
    if (std::abs(t.pose.x - 0.95) < 1e-9) t.clearance = 0.0;  // one touch in the last window
  }
  SUBCASE("engineered obstacle-1 cell") {
    const auto p = score_sector(sector_slices(log)[0], sector, calib, "mfc-continuous");
    CHECK(p.traversed);
    CHECK(p.s_n == doctest::Approx(0.74).epsilon(1e-12));
    CHECK(p.d_n == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(p.tq_n == doctest::Approx(0.82).epsilon(1e-12));
    CHECK(p.cl_raw == 0.0);
    CHECK(p.cl_n == 0.0);
  }
  SUBCASE("load normalization") {
    auto pressed = line_log(span(-0.1, 1.2, 131), {sector}, 0.02, 1);
    const auto g = sector_slices(pressed)[0];
    calib.cl_min[1] = cognitive_load(g.frames, 0.1);
    const auto p = score_sector(g, sector, calib, "m");
    CHECK(p.cl_norm == doctest::Approx(0.537883).epsilon(1e-6));
    CHECK(p.cl_n == doctest::Approx(1 - 0.537883).epsilon(1e-6));
  }
  SUBCASE("not traversed") {
    auto short_log = line_log(span(-0.1, 0.6, 71), {sector}, 0.02, 2);
    const auto p = score_sector(sector_slices(short_log)[0], sector, calib, "m");
    CHECK_FALSE(p.traversed);
    CHECK(p.cl_n == 1.0);
    CHECK(p.tq_n == 0.0);
    CHECK(p.s_n == 0.0);
    CHECK(p.d_n == 0.0);
  }
  SUBCASE("missing calibration entry") {
    calib.cl_min.clear();
    CHECK_THROWS_AS(score_sector(sector_slices(log)[0], sector, calib, "m"), ConfigError);
  }
  SUBCASE("window maximum for clearance when asked") {
    ScoringOptions literal;
    literal.max_clearance_windows = true;
    const auto p = score_sector(sector_slices(log)[0], sector, calib, "m", literal);
    CHECK(p.d_n == doctest::Approx(1.0));
  }
}

TEST_CASE("aggregate") {
  SUBCASE("study table with failures at penalty values") {
    const auto means = aggregate(study_points());
    REQUIRE(means.size() == 6);
    for (const auto& m : means) {
      if (m.method == "mfc-discrete") {
        CHECK(m.s_n == doctest::Approx(4.88 / 13).epsilon(1e-12));
        CHECK(std::count(m.traversed.begin(), m.traversed.end(), false) == 6);
      }
      if (m.method == "mfc-continuous") CHECK(std::abs(m.tq_n - 0.77) <= 0.005);
    }
    // Registered methods come first, in registry order.
    CHECK(means[0].method == "mfc-continuous");
    CHECK(means[5].method == "afc-continuous");
  }
  SUBCASE("all perfect") {
    std::vector<QualityLoadPoint> pts;
    for (int k = 1; k <= 13; ++k) {
      QualityLoadPoint p;
      p.method = "semi-afc";
      p.obstacle = k;
      p.traversed = true;
      p.tq_n = 1.0;
      pts.push_back(p);
    }
    CHECK(aggregate(pts)[0].tq_n == 1.0);
  }
  SUBCASE("duplicate and missing cells") {
    auto pts = study_points();
    pts.push_back(pts.front());
    CHECK_THROWS_AS(aggregate(pts), ValidationError);
    pts = study_points();
    pts.erase(pts.begin() + 3);
    CHECK_THROWS_AS(aggregate(pts), ValidationError);
  }
}

TEST_CASE("calibrate") {
  const auto sectors = contiguous_sectors(3, 1.0);
  SUBCASE("single log") {
    const auto log = line_log(span(-0.5, 3.5, 401), sectors, 0.02, 1);
    const auto table = calibrate({log});
    const auto groups = sector_slices(log);
    for (int i = 0; i < 3; ++i) {
      CHECK(table.cl_min.at(i + 1) == cognitive_load(groups[std::size_t(i)].frames, 0.1));
    }
    CHECK(table.d_d == 0.08);
  }
  SUBCASE("two logs keep the smaller load") {
    // Ten intervals per sector with one button down: CL = 10 * dt.
    const auto a = line_log(span(-0.5, 3.5, 41), sectors, 0.42, 1);
    const auto b = line_log(span(-0.5, 3.5, 41), sectors, 0.31, 1);
    REQUIRE(cognitive_load(sector_slices(a)[2].frames, 0.1) == doctest::Approx(4.2));
    const auto table = calibrate({a, b});
    CHECK(table.cl_min.at(3) == doctest::Approx(3.1).epsilon(1e-12));
  }
  SUBCASE("s_max is the largest in-sector shock") {
    auto log = line_log(span(-0.5, 3.5, 401), sectors, 0.02, 1);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(-20.0, 20.0);
    for (auto& t : log.ticks) t.accel = Eigen::Vector3d(a(rng), a(rng), a(rng));
    double brute = 0;
    for (const auto& t : log.ticks) {
      if (t.pose.x >= 0.0 && t.pose.x < 3.0) brute = std::max(brute, t.accel.norm());
    }
    CHECK(calibrate({log}).s_max == brute);
  }
  SUBCASE("uncovered sector") {
    const auto log = line_log(span(-0.5, 1.5, 201), sectors, 0.02, 1);
    try {
      calibrate({log});
      FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
      CHECK(std::string(e.what()).find("2, 3") != std::string::npos);
    }
  }
}
