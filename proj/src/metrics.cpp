#include "flipperbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "flipperbench/error.hpp"
#include "flipperbench/policies.hpp"

namespace flipperbench {

double sigmoid_norm(double x, double x_hat) {
  if (!(x_hat > 0)) throw ArgumentError("sigmoid_norm reference must be > 0");
  if (!(x >= 0)) throw ArgumentError("sigmoid_norm argument must be >= 0");
  // Same as 2 - 2 / (1 + e^(-x/x_hat)) but keeps resolving differences far out.
  return 2.0 / (1.0 + std::exp(x / x_hat));
}

double linear_norm(double x, double x_min) {
  if (!(x_min > 0)) throw ArgumentError("linear_norm reference must be > 0");
  return std::clamp(x / x_min, 0.0, 1.0);
}

double cognitive_load(const std::vector<CommandFrame>& frames, double deadzone) {
  double cl = 0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const double dt = frames[i].t - frames[i - 1].t;
    if (!(dt > 0)) {
      throw ValidationError("command timestamps not increasing at frame " + std::to_string(i));
    }
    if (frames[i].buttons.size() != frames[0].buttons.size() ||
        frames[i].axes.size() != frames[0].axes.size()) {
      throw ValidationError("command frame " + std::to_string(i) + " changes width");
    }
    cl += pressed_count(frames[i], deadzone) * dt;
  }
  return cl;
}

double shock(const Eigen::Vector3d& accel) { return accel.norm(); }

double traversal_quality(double s_n, double d_n) { return (s_n + d_n) / 2; }

std::vector<double> window_reduce(const std::vector<ArcSample>& samples, double start, double end,
                                  int windows, Reducer reducer) {
  if (windows < 1 || !(end > start)) throw ArgumentError("window_reduce needs windows >= 1 and end > start");
  const double len = (end - start) / windows;
  std::vector<double> out(std::size_t(windows), 0.0);
  std::vector<bool> seen(std::size_t(windows), false);
  for (const auto& s : samples) {
    if (s.arc < start || s.arc >= end) continue;
    const auto w = std::size_t(std::min(windows - 1, int(std::floor((s.arc - start) / len))));
    if (!seen[w]) {
      out[w] = s.value;
      seen[w] = true;
    } else {
      out[w] = reducer == Reducer::kMax ? std::max(out[w], s.value) : std::min(out[w], s.value);
    }
  }
  for (int w = 0; w < windows; ++w) {
    if (!seen[std::size_t(w)]) throw ScoringError("window " + std::to_string(w + 1) + " has no samples");
  }
  return out;
}

std::vector<SectorGroup> sector_slices(const EpisodeLog& log) {
  const auto& line = log.header.line;
  std::vector<double> arc;
  arc.reserve(log.ticks.size());
  for (const auto& t : log.ticks) arc.push_back(line.arc_length(t.pose.x, t.pose.y));

  std::vector<SectorGroup> groups;
  for (const auto& sec : log.header.sectors) {
    SectorGroup g;
    g.sector = sec.id;
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < log.ticks.size(); ++i) {
      if (arc[i] >= sec.end) g.traversed = true;
      if (!sec.contains(arc[i])) continue;
      if (!first) first = i;
      last = i;
      g.shock.push_back({arc[i], shock(log.ticks[i].accel)});
      g.clearance.push_back({arc[i], log.ticks[i].clearance});
    }
    g.entered = first.has_value();
    if (first) {
      for (std::size_t i = *first; i-- > 0;) {
        if (!log.ticks[i].cmds.empty()) {
          g.frames.push_back(log.ticks[i].cmds.back().frame);
          break;
        }
      }
      for (std::size_t i = *first; i <= *last; ++i) {
        for (const auto& lf : log.ticks[i].cmds) g.frames.push_back(lf.frame);
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

void CalibrationTable::validate() const {
  if (!(s_max > 0)) throw ConfigError("calibration s_max must be > 0");
  if (!(d_d > 0)) throw ConfigError("calibration d_d must be > 0");
  for (const auto& [id, v] : cl_min) {
    if (!(v > 0)) throw ConfigError("calibration CL_min for sector " + std::to_string(id) + " must be > 0");
  }
  for (const auto& [id, v] : s_max_override) {
    if (!(v > 0)) throw ConfigError("calibration s_max for sector " + std::to_string(id) + " must be > 0");
  }
}

double CalibrationTable::s_max_for(int sector) const {
  const auto it = s_max_override.find(sector);
  return it == s_max_override.end() ? s_max : it->second;
}

double CalibrationTable::cl_min_for(int sector) const {
  const auto it = cl_min.find(sector);
  if (it == cl_min.end()) throw ConfigError("no calibration entry for sector " + std::to_string(sector));
  return it->second;
}

QualityLoadPoint score_sector(const SectorGroup& group, const ObstacleSector& sector,
                              const CalibrationTable& calib, const std::string& method,
                              const ScoringOptions& options) {
  QualityLoadPoint p;
  p.method = method;
  p.obstacle = sector.id;
  const double cl_min = calib.cl_min_for(sector.id);
  p.cl_raw = cognitive_load(group.frames, options.deadzone);
  if (!group.traversed) return p;  // penalty: CL_n 1, quality 0

  p.traversed = true;
  p.cl_norm = sigmoid_norm(p.cl_raw, cl_min);
  p.cl_n = 1.0 - p.cl_norm;
  try {
    const auto sw = window_reduce(group.shock, sector.start, sector.end, sector.windows, Reducer::kMax);
    const auto dw = window_reduce(group.clearance, sector.start, sector.end, sector.windows,
                                  options.max_clearance_windows ? Reducer::kMax : Reducer::kMin);
    const double ref = calib.s_max_for(sector.id) / 2;
    double s = 0, d = 0;
    for (double v : sw) s += sigmoid_norm(v, ref);
    for (double v : dw) d += linear_norm(v, calib.d_d);
    p.s_n = s / double(sw.size());
    p.d_n = d / double(dw.size());
  } catch (const ScoringError& e) {
    throw ScoringError(method + " sector " + std::to_string(sector.id) + ": " + e.what());
  }
  p.tq_n = traversal_quality(p.s_n, p.d_n);
  return p;
}

std::vector<QualityLoadPoint> score_log(const EpisodeLog& log, const CalibrationTable& calib,
                                        const ScoringOptions& options) {
  auto groups = sector_slices(log);
  std::vector<QualityLoadPoint> out;
  ScoringOptions opts = options;
  opts.deadzone = log.header.deadzone;
  for (std::size_t i = 0; i < log.header.sectors.size(); ++i) {
    const auto& sec = log.header.sectors[i];
    if (std::find(log.header.targets.begin(), log.header.targets.end(), sec.id) == log.header.targets.end()) {
      continue;
    }
    out.push_back(score_sector(groups[i], sec, calib, log.header.method, opts));
  }
  return out;
}

std::vector<QualityLoadPoint> select_points(const std::vector<std::vector<QualityLoadPoint>>& per_log) {
  std::map<std::pair<std::string, int>, QualityLoadPoint> best;
  for (const auto& pts : per_log) {
    for (const auto& p : pts) {
      const auto key = std::make_pair(p.method, p.obstacle);
      const auto it = best.find(key);
      if (it == best.end()) {
        best.emplace(key, p);
        continue;
      }
      const auto& q = it->second;
      if ((p.traversed && !q.traversed) || (p.traversed == q.traversed && p.tq_n > q.tq_n)) it->second = p;
    }
  }
  std::vector<QualityLoadPoint> out;
  for (auto& [k, p] : best) out.push_back(p);
  return out;
}

std::vector<std::string> method_order(const std::vector<QualityLoadPoint>& points) {
  std::set<std::string> names;
  for (const auto& p : points) names.insert(p.method);
  std::vector<std::string> out;
  for (const auto& r : registered_policies()) {
    if (names.erase(r)) out.push_back(r);
  }
  out.insert(out.end(), names.begin(), names.end());
  return out;
}

std::vector<MethodMean> aggregate(const std::vector<QualityLoadPoint>& points) {
  std::set<int> obstacles;
  std::map<std::pair<std::string, int>, const QualityLoadPoint*> cell;
  for (const auto& p : points) {
    obstacles.insert(p.obstacle);
    if (!cell.emplace(std::make_pair(p.method, p.obstacle), &p).second) {
      throw ValidationError("duplicate point for " + p.method + " obstacle " + std::to_string(p.obstacle));
    }
  }
  std::vector<MethodMean> out;
  for (const auto& m : method_order(points)) {
    MethodMean mm;
    mm.method = m;
    for (int o : obstacles) {
      const auto it = cell.find({m, o});
      if (it == cell.end()) {
        throw ValidationError("missing point for " + m + " obstacle " + std::to_string(o));
      }
      const auto& p = *it->second;
      mm.cl_n += p.cl_n;
      mm.tq_n += p.tq_n;
      mm.s_n += p.s_n;
      mm.d_n += p.d_n;
      mm.obstacles.push_back(o);
      mm.traversed.push_back(p.traversed);
    }
    const double n = double(obstacles.size());
    mm.cl_n /= n;
    mm.tq_n /= n;
    mm.s_n /= n;
    mm.d_n /= n;
    out.push_back(std::move(mm));
  }
  return out;
}

CalibrationTable calibrate(const std::vector<EpisodeLog>& logs) {
  if (logs.empty()) throw CalibrationError("no logs to calibrate from");
  CalibrationTable table;
  table.d_d = logs.front().header.d_d;
  std::set<int> sectors;
  for (const auto& log : logs) {
    for (const auto& s : log.header.sectors) sectors.insert(s.id);
  }
  for (const auto& log : logs) {
    const auto groups = sector_slices(log);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto& g = groups[i];
      for (const auto& s : g.shock) table.s_max = std::max(table.s_max, s.value);
      const auto& targets = log.header.targets;
      if (!g.traversed || std::find(targets.begin(), targets.end(), g.sector) == targets.end()) continue;
      const double cl = cognitive_load(g.frames, log.header.deadzone);
      auto [it, fresh] = table.cl_min.emplace(g.sector, cl);
      if (!fresh) it->second = std::min(it->second, cl);
    }
  }
  std::string missing;
  for (int id : sectors) {
    const auto it = table.cl_min.find(id);
    if (it == table.cl_min.end() || !(it->second > 0)) {
      missing += (missing.empty() ? "" : ", ") + std::to_string(id);
    }
  }
  if (!missing.empty()) throw CalibrationError("no traversing log with operator input for sectors: " + missing);
  if (!(table.s_max > 0)) throw CalibrationError("no shock samples inside any sector");
  return table;
}

}  // namespace flipperbench
