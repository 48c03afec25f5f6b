#include "flipperbench/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "flipperbench/error.hpp"

namespace flipperbench {

namespace {

const char* kCheck = "✓";
const char* kCross = "×";

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads; results
// come back in index order whatever the scheduling.
template <typename Fn>
auto parallel_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<R> out;
  out.reserve(n);
  for (std::size_t base = 0; base < n; base += width) {
    std::vector<std::future<R>> batch;
    for (std::size_t i = base; i < std::min(n, base + width); ++i) {
      batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async, fn, i));
    }
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

std::string num(double v) { return format_double(v); }

std::vector<int> obstacle_ids(const std::vector<QualityLoadPoint>& points) {
  std::set<int> ids;
  for (const auto& p : points) ids.insert(p.obstacle);
  return {ids.begin(), ids.end()};
}

std::vector<QualityLoadPoint> sorted_points(std::vector<QualityLoadPoint> points) {
  const auto order = method_order(points);
  auto rank = [&](const std::string& m) {
    return std::find(order.begin(), order.end(), m) - order.begin();
  };
  std::stable_sort(points.begin(), points.end(), [&](const auto& a, const auto& b) {
    const auto ra = rank(a.method), rb = rank(b.method);
    return ra != rb ? ra < rb : a.obstacle < b.obstacle;
  });
  return points;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, long line) {
  double v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw ParseError("'" + text + "' is not a number", line);
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

// ---- run ------------------------------------------------------------------------

std::string log_file_name(const std::string& method, const std::vector<int>& targets) {
  if (targets.empty()) return method + "_full.jsonl";
  std::string name = method;
  for (int id : targets) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_sector%02d", id);
    name += buf;
  }
  return name + ".jsonl";
}

std::vector<std::filesystem::path> cmd_run(const BenchConfig& config, const std::string& method,
                                           const std::filesystem::path& out_dir, std::ostream& report) {
  PolicyConfig pc = config.policy;
  pc.d_d = config.geometry.clearance;
  make_policy(method, pc, config.mapping);  // unknown names fail before any work
  const SimContext ctx = config.context();

  std::vector<std::vector<int>> passes;
  if (config.passes == PassMode::kFull) {
    passes.push_back(config.episode.targets);
  } else {
    for (const auto& s : config.arena.sectors) passes.push_back({s.id});
  }

  const auto logs = parallel_map(passes.size(), [&](std::size_t i) {
    EpisodeConfig ec = config.episode;
    ec.method = method;
    ec.targets = passes[i];
    ec.seed = config.seed;
    return run_scripted(ec, ctx, config.scripted);
  });

  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& log = logs[i];
    const auto path = out_dir / log_file_name(method, passes[i]);
    write_text(path, log_to_string(log));
    written.push_back(path);

    report << method << " " << path.filename().string() << ": " << to_string(log.footer.status);
    if (!log.footer.reason.empty()) report << " (" << log.footer.reason << ")";
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.2f s |", log.footer.sim_duration);
    report << buf;
    const auto groups = sector_slices(log);
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const auto& targets = log.header.targets;
      if (std::find(targets.begin(), targets.end(), groups[k].sector) == targets.end()) continue;
      report << " " << groups[k].sector << (groups[k].traversed ? kCheck : kCross);
    }
    report << "\n";
  }
  return written;
}

// ---- calibrate / score ---------------------------------------------------------

std::vector<EpisodeLog> load_logs(const std::filesystem::path& log_dir) {
  if (!std::filesystem::is_directory(log_dir)) {
    throw ValidationError("log directory " + log_dir.string() + " does not exist");
  }
  const auto paths = list_logs(log_dir);
  if (paths.empty()) throw ValidationError("no *.jsonl logs in " + log_dir.string());
  return parallel_map(paths.size(), [&](std::size_t i) {
    try {
      return read_log(paths[i]);
    } catch (const ParseError& e) {
      throw ParseError(paths[i].string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(paths[i].string() + ": " + e.what());
    }
  });
}

CalibrationTable cmd_calibrate(const std::filesystem::path& log_dir, const std::filesystem::path& out_file,
                               std::ostream& report) {
  const auto logs = load_logs(log_dir);
  const CalibrationTable table = calibrate(logs);
  write_text(out_file, calibration_to_toml(table));
  for (const auto& [id, v] : table.cl_min) report << "sector " << id << " CL_min " << num(v) << "\n";
  report << "s_max " << num(table.s_max) << "\n";
  return table;
}

std::string scores_csv(const std::vector<QualityLoadPoint>& points) {
  std::ostringstream o;
  o << "method,obstacle,traversed,s_n,d_n,tq_n,cl_raw,cl_n\n";
  for (const auto& p : sorted_points(points)) {
    o << p.method << ',' << p.obstacle << ',' << (p.traversed ? "true" : "false") << ',' << num(p.s_n)
      << ',' << num(p.d_n) << ',' << num(p.tq_n) << ',' << num(p.cl_raw) << ',' << num(p.cl_n) << '\n';
  }
  return o.str();
}

std::string means_csv(const std::vector<MethodMean>& means) {
  std::ostringstream o;
  o << "method,mean_cl_n,mean_tq_n";
  if (!means.empty()) {
    for (int id : means.front().obstacles) o << ',' << id;
  }
  o << '\n';
  for (const auto& m : means) {
    o << m.method << ',' << num(m.cl_n) << ',' << num(m.tq_n);
    for (bool t : m.traversed) o << ',' << (t ? kCheck : kCross);
    o << '\n';
  }
  return o.str();
}

std::string table_csv(const std::vector<QualityLoadPoint>& points, const std::vector<MethodMean>& means,
                      TableColumn column) {
  static const char* names[] = {"s_n", "d_n", "tq_n", "cl_n"};
  std::map<std::pair<std::string, int>, const QualityLoadPoint*> cell;
  for (const auto& p : points) cell[{p.method, p.obstacle}] = &p;
  const auto ids = obstacle_ids(points);

  std::ostringstream o;
  o << "method,mean_" << names[int(column)];
  for (int id : ids) o << ',' << id;
  o << '\n';
  for (const auto& m : means) {
    double mean = 0;
    switch (column) {
      case TableColumn::kShock: mean = m.s_n; break;
      case TableColumn::kDistance: mean = m.d_n; break;
      case TableColumn::kQuality: mean = m.tq_n; break;
      case TableColumn::kLoad: mean = m.cl_n; break;
    }
    o << m.method << ',' << num(mean);
    for (int id : ids) {
      const auto it = cell.find({m.method, id});
      const QualityLoadPoint* p = it == cell.end() ? nullptr : it->second;
      o << ',';
      if (!p || !p->traversed) {
        o << kCross;
        continue;
      }
      switch (column) {
        case TableColumn::kShock: o << num(p->s_n); break;
        case TableColumn::kDistance: o << num(p->d_n); break;
        case TableColumn::kQuality: o << num(p->tq_n); break;
        case TableColumn::kLoad: o << num(p->cl_n); break;
      }
    }
    o << '\n';
  }
  return o.str();
}

std::vector<QualityLoadPoint> cmd_score(const std::filesystem::path& log_dir,
                                        const std::filesystem::path& calibration,
                                        const std::filesystem::path& out_dir,
                                        const ScoringOptions& options, std::ostream& report) {
  const CalibrationTable calib = load_calibration(calibration);
  const auto paths = list_logs(log_dir);
  const auto logs = load_logs(log_dir);
  const auto per_log = parallel_map(logs.size(), [&](std::size_t i) {
    try {
      return score_log(logs[i], calib, options);
    } catch (const ScoringError& e) {
      throw ScoringError(paths[i].string() + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(paths[i].string() + ": " + e.what());
    }
  });
  const auto points = sorted_points(select_points(per_log));
  const auto means = aggregate(points);

  write_text(out_dir / "scores.csv", scores_csv(points));
  write_text(out_dir / "means.csv", means_csv(means));
  write_text(out_dir / "shock.csv", table_csv(points, means, TableColumn::kShock));
  write_text(out_dir / "distance.csv", table_csv(points, means, TableColumn::kDistance));
  write_text(out_dir / "quality.csv", table_csv(points, means, TableColumn::kQuality));
  write_text(out_dir / "load.csv", table_csv(points, means, TableColumn::kLoad));

  for (const auto& m : means) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-34s CL_n %.3f  TQ_n %.3f |", m.method.c_str(), m.cl_n, m.tq_n);
    report << buf;
    for (std::size_t i = 0; i < m.obstacles.size(); ++i) {
      report << ' ' << m.obstacles[i] << (m.traversed[i] ? kCheck : kCross);
    }
    report << '\n';
  }
  return points;
}

std::vector<QualityLoadPoint> parse_scores_csv(std::istream& in) {
  static const std::vector<std::string> header{"method", "obstacle", "traversed", "s_n",
                                               "d_n",    "tq_n",     "cl_raw",    "cl_n"};
  std::string line;
  long n = 0;
  std::vector<QualityLoadPoint> out;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (n == 1) {
      if (split_csv(line) != header) throw ParseError("unexpected scores header", n);
      continue;
    }
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != header.size()) throw ParseError("expected 8 columns", n);
    QualityLoadPoint p;
    p.method = c[0];
    p.obstacle = int(parse_number(c[1], n));
    if (c[2] == "true") {
      p.traversed = true;
    } else if (c[2] != "false") {
      throw ParseError("traversed must be true or false", n);
    }
    p.s_n = parse_number(c[3], n);
    p.d_n = parse_number(c[4], n);
    p.tq_n = parse_number(c[5], n);
    p.cl_raw = parse_number(c[6], n);
    p.cl_n = parse_number(c[7], n);
    p.cl_norm = 1.0 - p.cl_n;
    out.push_back(std::move(p));
  }
  if (n == 0) throw ParseError("empty scores file");
  return out;
}

// ---- graph ------------------------------------------------------------------------

std::vector<GraphPoint> graph_points(const std::vector<QualityLoadPoint>& points) {
  if (points.empty()) throw ValidationError("no scores to plot");
  const auto sorted = sorted_points(points);
  std::vector<GraphPoint> out;
  std::map<std::string, std::pair<double, double>> sum;
  std::map<std::string, int> count;
  for (const auto& p : sorted) {
    GraphPoint g{p.method, std::to_string(p.obstacle), p.traversed ? p.cl_n : 1.0,
                 p.traversed ? p.tq_n : 0.0};
    sum[p.method].first += g.cl_n;
    sum[p.method].second += g.tq_n;
    ++count[p.method];
    out.push_back(std::move(g));
  }
  for (const auto& m : method_order(points)) {
    const double n = count[m];
    out.push_back({m, "*", sum[m].first / n, sum[m].second / n});
  }
  return out;
}

std::string graph_csv(const std::vector<GraphPoint>& points) {
  std::ostringstream o;
  o << "method,obstacle,cl_n,tq_n\n";
  for (const auto& p : points) o << p.method << ',' << p.obstacle << ',' << num(p.cl_n) << ',' << num(p.tq_n) << '\n';
  return o.str();
}

std::string graph_svg(const std::vector<GraphPoint>& points) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::vector<std::string> methods;
  for (const auto& p : points) {
    if (std::find(methods.begin(), methods.end(), p.method) == methods.end()) methods.push_back(p.method);
  }
  auto color = [&](const std::string& m) {
    const auto i = std::size_t(std::find(methods.begin(), methods.end(), m) - methods.begin());
    return palette[i % std::size(palette)];
  };
  const SvgFrame f;
  char buf[256];
  std::ostringstream o;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
                f.width, f.height, f.width, f.height);
  o << buf;
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes with ticks every 0.2.
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                f.x(0), f.y(1), f.x(1) - f.x(0), f.y(0) - f.y(1));
  o << buf;
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">%.1f</text>\n"
                  "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%.1f</text>\n",
                  f.x(v), f.y(0) + 16, v, f.x(0) - 6, f.y(v) + 4, v);
    o << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\">cognitive load CL_n</text>\n"
                "<text x=\"%g\" y=\"%g\" font-size=\"13\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 %g %g)\">traversal quality TQ_n</text>\n",
                (f.x(0) + f.x(1)) / 2, f.height - 20, f.left - 45, (f.y(0) + f.y(1)) / 2, f.left - 45,
                (f.y(0) + f.y(1)) / 2);
  o << buf;
  for (const auto& p : points) {
    const bool mean = p.obstacle == "*";
    std::snprintf(buf, sizeof buf,
                  "<circle class=\"%s\" data-method=\"%s\" data-obstacle=\"%s\" cx=\"%.3f\" cy=\"%.3f\" "
                  "r=\"%d\" fill=\"%s\"%s/>\n",
                  mean ? "mean" : "point", p.method.c_str(), p.obstacle.c_str(), f.x(p.cl_n), f.y(p.tq_n),
                  mean ? 7 : 3, color(p.method), mean ? " stroke=\"black\" stroke-width=\"1.5\"" : " fill-opacity=\"0.6\"");
    o << buf;
  }
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const double y = f.top + 10 + 18 * double(i);
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%g\" cy=\"%g\" r=\"5\" fill=\"%s\"/><text x=\"%g\" y=\"%g\" font-size=\"10\">%s</text>\n",
                  f.x(1) + 14, y, color(methods[i]), f.x(1) + 24, y + 4, methods[i].c_str());
    o << buf;
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<GraphPoint> cmd_graph(const std::filesystem::path& scores, const std::filesystem::path& out_svg,
                                  const std::filesystem::path& out_csv, std::ostream& report) {
  std::istringstream in(read_text(scores));
  std::vector<QualityLoadPoint> points;
  try {
    points = parse_scores_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(scores.string() + ": " + e.what());
  }
  if (points.empty()) throw ValidationError(scores.string() + ": no scores to plot");
  const auto g = graph_points(points);
  write_text(out_csv, graph_csv(g));
  write_text(out_svg, graph_svg(g));
  std::size_t means = 0;
  for (const auto& p : g) means += p.obstacle == "*";
  report << g.size() - means << " points, " << means << " means -> " << out_svg.string() << ", "
         << out_csv.string() << "\n";
  return g;
}

// ---- replay ---------------------------------------------------------------------

ReplayResult cmd_replay(const BenchConfig& config, const std::filesystem::path& log_path,
                        const std::optional<std::filesystem::path>& calibration,
                        const std::optional<std::filesystem::path>& out_log, std::ostream& report) {
  const EpisodeLog log = read_log(log_path);
  const SimContext ctx = config.context();
  if (log.header.arena_hash != ctx.arena.hash()) {
    throw ConfigError(log_path.string() + " was recorded on arena " + log.header.arena_id + " (" +
                      log.header.arena_hash + "), configured arena is " + ctx.arena.id + " (" +
                      ctx.arena.hash() + ")");
  }
  if (log.header.geometry_hash != ctx.geometry.hash()) {
    throw ConfigError(log_path.string() + " was recorded with a different robot geometry");
  }

  std::vector<LoggedFrame> frames;
  for (const auto& t : log.ticks) {
    for (const auto& lf : t.cmds) frames.push_back(lf);
  }
  EpisodeConfig ec = config.episode;
  ec.method = log.header.method;
  ec.dt = log.header.dt;
  ec.targets = log.header.targets;
  ec.seed = log.header.seed;
  ec.start_time = log.header.start_time;
  const auto& first = log.ticks.front();
  ec.start_pose = Eigen::Vector3d(first.pose.x, first.pose.y, first.pose.yaw);
  ec.initial_theta = first.theta;
  ec.max_duration = log.footer.sim_duration;

  auto policy = make_policy(log.header.method, ctx.policy, ctx.mapping);
  RecordedOperator op(std::move(frames));
  ReplayResult r;
  r.replayed = run_episode(ec, *policy, op, ctx);

  const std::size_t n = std::min(r.replayed.ticks.size(), log.ticks.size());
  for (std::size_t i = 0; i < n && !r.first_divergence; ++i) {
    if (!(r.replayed.ticks[i] == log.ticks[i])) r.first_divergence = i;
  }
  if (!r.first_divergence && r.replayed.ticks.size() != log.ticks.size()) r.first_divergence = n;
  r.reproduced = !r.first_divergence;

  report << log_path.filename().string() << ": " << log.header.method << ", " << log.ticks.size()
         << " ticks, recorded " << to_string(log.footer.status) << "; replay "
         << to_string(r.replayed.footer.status);
  if (r.reproduced) {
    report << ", trajectory reproduced\n";
  } else {
    report << ", diverges at tick " << *r.first_divergence << "\n";
  }
  for (const auto& g : sector_slices(log)) {
    if (!g.entered) continue;
    report << "  sector " << g.sector << (g.traversed ? " traversed" : " not traversed") << ", CL "
           << num(cognitive_load(g.frames, log.header.deadzone)) << "\n";
  }
  if (calibration) {
    ScoringOptions opts = config.scoring;
    r.points = score_log(log, load_calibration(*calibration), opts);
    report << scores_csv(r.points);
  }
  if (out_log) write_text(*out_log, log_to_string(r.replayed));
  return r;
}

}  // namespace flipperbench
