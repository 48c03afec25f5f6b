#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "fixtures.hpp"
#include "flipperbench/bench.hpp"

using namespace flipperbench;
using namespace fixtures;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

QualityLoadPoint point(const std::string& method, int obstacle, double cl_n, double tq_n) {
  QualityLoadPoint p;
  p.method = method;
  p.obstacle = obstacle;
  p.traversed = true;
  p.cl_n = cl_n;
  p.cl_norm = 1.0 - cl_n;
  p.tq_n = tq_n;
  p.s_n = tq_n;
  p.d_n = tq_n;
  return p;
}

QualityLoadPoint failed(const std::string& method, int obstacle) {
  QualityLoadPoint p;
  p.method = method;
  p.obstacle = obstacle;
  return p;
}

}  // namespace

TEST_CASE("graph: one point, one mean") {
  const auto g = graph_points({point("semi-afc", 1, 0.4, 0.74)});
  REQUIRE(g.size() == 2);
  const auto rows = lines(graph_csv(g));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "method,obstacle,cl_n,tq_n");
  CHECK(rows[1] == "semi-afc,1,0.4,0.74");
  CHECK(rows[2] == "semi-afc,*,0.4,0.74");

  // The mean marker lands where the frame maps (0.4, 0.74).
  const SvgFrame f;
  char expect[128];
  std::snprintf(expect, sizeof expect, "data-obstacle=\"*\" cx=\"%.3f\" cy=\"%.3f\"", f.x(0.4), f.y(0.74));
  CHECK(graph_svg(g).find(expect) != std::string::npos);
}

TEST_CASE("graph: the study table") {
  const auto g = graph_points(study_points());
  CHECK(g.size() == 78 + 6);
  std::size_t means = 0;
  for (const auto& p : g) means += p.obstacle == "*";
  CHECK(means == 6);
  // Failed cells are plotted at full load and zero quality.
  for (const auto& p : g) {
    if (p.method == "mfc-discrete" && p.obstacle == "5") {
      CHECK(p.cl_n == 1.0);
      CHECK(p.tq_n == 0.0);
    }
  }
  const std::string svg = graph_svg(g);
  CHECK(svg.starts_with("<svg"));
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 84);
}

TEST_CASE("graph: a method that never traverses sits at (1, 0)") {
  const auto g = graph_points({failed("stuck", 1), failed("stuck", 2), point("semi-afc", 1, 0.3, 0.8),
                               point("semi-afc", 2, 0.5, 0.6)});
  bool seen = false;
  for (const auto& p : g) {
    if (p.method == "stuck" && p.obstacle == "*") {
      seen = true;
      CHECK(p.cl_n == 1.0);
      CHECK(p.tq_n == 0.0);
    }
    if (p.method == "semi-afc" && p.obstacle == "*") {
      CHECK(p.cl_n == doctest::Approx(0.4));
      CHECK(p.tq_n == doctest::Approx(0.7));
    }
  }
  CHECK(seen);
}

TEST_CASE("scores csv round trip") {
  const auto pts = study_points();
  const std::string text = scores_csv(pts);
  CHECK(lines(text).size() == 79);
  std::istringstream in(text);
  const auto back = parse_scores_csv(in);
  CHECK(scores_csv(back) == text);
  std::istringstream junk("method,obstacle\nfoo\n");
  CHECK_THROWS(parse_scores_csv(junk));
}

TEST_CASE("tables") {
  const auto pts = study_points();
  const auto means = aggregate(pts);
  const auto quality = lines(table_csv(pts, means, TableColumn::kQuality));
  REQUIRE(quality.size() == 7);
  CHECK(quality[0].starts_with("method,mean_tq_n,1,2,"));
  // mfc-discrete failed obstacle 5: the cell carries the cross.
  for (const auto& row : quality) {
    if (!row.starts_with("mfc-discrete,")) continue;
    std::vector<std::string> cells;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 15);
    CHECK(cells[2 + 4] == "×");
    CHECK(cells[2] == "0.69");
  }
}

TEST_CASE("quality table is the mean of shock and distance") {
  auto a = point("m", 1, 0.2, 0.0), b = point("m", 2, 0.6, 0.0);
  a.s_n = 0.9, a.d_n = 0.5, a.tq_n = 0.7;
  b.s_n = 0.3, b.d_n = 0.7, b.tq_n = 0.5;
  const std::vector<QualityLoadPoint> pts{a, b};
  const auto means = aggregate(pts);
  REQUIRE(means.size() == 1);
  CHECK(means[0].tq_n == doctest::Approx((means[0].s_n + means[0].d_n) / 2).epsilon(1e-12));
  CHECK(lines(table_csv(pts, means, TableColumn::kQuality))[1] == "m,0.6,0.7,0.5");
  CHECK(lines(table_csv(pts, means, TableColumn::kShock))[1] == "m,0.6,0.9,0.3");
}

TEST_CASE("run, calibrate, score on a small course") {
  const auto dir = temp_dir("bench_pipeline");
  BenchConfig config;
  config.arena = flat_arena(3.0);
  std::ostringstream report;

  const auto written = cmd_run(config, "mfc-discrete-antistuck", dir / "logs", report);
  REQUIRE(written.size() == 1);
  CHECK(written[0].filename() == "mfc-discrete-antistuck_full.jsonl");
  const auto log = read_log(written[0]);
  CHECK(log.header.sectors.size() == 1);
  CHECK(log.footer.status == EpisodeStatus::kCompleted);
  CHECK(report.str().find("mfc-discrete-antistuck") != std::string::npos);

  const auto calib = cmd_calibrate(dir / "logs", dir / "calibration.toml", report);
  CHECK(calib.cl_min.count(1) == 1);
  CHECK(calib.s_max > 0.0);

  const auto pts = cmd_score(dir / "logs", dir / "calibration.toml", dir / "out", ScoringOptions{}, report);
  REQUIRE(pts.size() == 1);
  for (const char* f : {"scores.csv", "means.csv", "shock.csv", "distance.csv", "quality.csv", "load.csv"}) {
    CHECK(fs::exists(dir / "out" / f));
  }
  const std::string first = slurp(dir / "out" / "scores.csv");
  cmd_score(dir / "logs", dir / "calibration.toml", dir / "out", ScoringOptions{}, report);
  CHECK(slurp(dir / "out" / "scores.csv") == first);

  const auto g = cmd_graph(dir / "out" / "scores.csv", dir / "out" / "graph.svg", dir / "out" / "graph.csv", report);
  CHECK(g.size() == 2);
}

TEST_CASE("file names") {
  CHECK(log_file_name("semi-afc", {}) == "semi-afc_full.jsonl");
  CHECK(log_file_name("semi-afc", {7}) == "semi-afc_sector07.jsonl");
}

TEST_CASE("empty inputs") {
  const auto dir = temp_dir("bench_empty");
  std::ostringstream report;
  write_text(dir / "scores.csv", "method,obstacle,traversed,s_n,d_n,tq_n,cl_raw,cl_n\n");
  CHECK_THROWS_AS(cmd_graph(dir / "scores.csv", dir / "g.svg", dir / "g.csv", report), ValidationError);
  fs::create_directories(dir / "logs");
  CHECK_THROWS(cmd_calibrate(dir / "logs", dir / "c.toml", report));
  CHECK_FALSE(fs::exists(dir / "c.toml"));
}

TEST_CASE("unknown method fails before writing") {
  const auto dir = temp_dir("bench_unknown");
  std::ostringstream report;
  CHECK_THROWS_AS(cmd_run(BenchConfig{}, "no-such", dir, report), ConfigError);
  CHECK(fs::is_empty(dir));
}
