#include "flipperbench/logstore.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "flipperbench/error.hpp"

namespace flipperbench {

using Json = nlohmann::ordered_json;

namespace {

bool same_line(const TraversalLine& a, const TraversalLine& b) {
  return a.start == b.start && a.heading == b.heading;
}

bool same_sectors(const std::vector<ObstacleSector>& a, const std::vector<ObstacleSector>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].id != b[i].id || a[i].start != b[i].start || a[i].end != b[i].end ||
        a[i].windows != b[i].windows) {
      return false;
    }
  }
  return true;
}

}  // namespace

bool LogHeader::operator==(const LogHeader& o) const {
  return schema == o.schema && method == o.method && arena_id == o.arena_id &&
         arena_hash == o.arena_hash && geometry_hash == o.geometry_hash && dt == o.dt &&
         start_time == o.start_time && d_d == o.d_d && same_line(line, o.line) &&
         same_sectors(sectors, o.sectors) && targets == o.targets && buttons == o.buttons &&
         axes == o.axes && deadzone == o.deadzone && seed == o.seed;
}

std::string_view to_string(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::kCompleted: return "completed";
    case EpisodeStatus::kFailed: return "failed";
    case EpisodeStatus::kAborted: return "aborted";
  }
  return "?";
}

EpisodeStatus status_from_string(std::string_view s) {
  if (s == "completed") return EpisodeStatus::kCompleted;
  if (s == "failed") return EpisodeStatus::kFailed;
  if (s == "aborted") return EpisodeStatus::kAborted;
  throw ParseError("unknown episode status '" + std::string(s) + "'");
}

// ---- validation -----------------------------------------------------------------

namespace {

// Incremental checks shared by validate() and read_log(); `where` names the
// offending record in error messages.
class TickChecker {
 public:
  explicit TickChecker(const LogHeader& h) : header_(h) {}

  void check(const TickRecord& r, const std::string& where) {
    auto fail = [&](const std::string& msg) { throw ValidationError(where + ": " + msg); };
    if (!std::isfinite(r.t)) fail("non-finite timestamp");
    if (have_t_ && !(r.t > last_t_)) fail("timestamp " + num(r.t) + " does not increase");
    have_t_ = true;
    last_t_ = r.t;
    const Pose& p = r.pose;
    for (double v : {p.x, p.y, p.z, p.yaw, p.pitch, p.roll, r.v_cmd, r.omega_cmd, r.ground_speed,
                     r.clearance}) {
      if (!std::isfinite(v)) fail("non-finite state value");
    }
    if (!r.theta.allFinite() || !r.accel.allFinite()) fail("non-finite state value");
    if (r.theta.cwiseAbs().maxCoeff() > std::numbers::pi / 2 + 1e-9) fail("flipper angle beyond pi/2");
    if (r.clearance < 0) fail("negative clearance");
    if (r.ground_speed < 0) fail("negative ground speed");
    for (const auto& lf : r.cmds) {
      const auto& f = lf.frame;
      if (f.buttons.size() != header_.buttons.size() || f.axes.size() != header_.axes.size()) {
        fail("command frame width differs from the header");
      }
      if (!std::isfinite(f.t) || !std::isfinite(lf.rx)) fail("non-finite command timestamp");
      if (have_frame_ && !(f.t > last_frame_t_)) fail("command timestamp " + num(f.t) + " does not increase");
      have_frame_ = true;
      last_frame_t_ = f.t;
      for (auto b : f.buttons) {
        if (b > 1) fail("button value outside {0, 1}");
      }
      for (double a : f.axes) {
        if (!(std::abs(a) <= 1.0)) fail("axis value outside [-1, 1]");
      }
    }
  }

 private:
  static std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  }

  const LogHeader& header_;
  bool have_t_ = false, have_frame_ = false;
  double last_t_ = 0, last_frame_t_ = 0;
};

void check_header(const LogHeader& h) {
  if (!(h.dt > 0)) throw ValidationError("header: dt must be > 0");
  if (!(h.d_d > 0)) throw ValidationError("header: d_d must be > 0");
  if (!(h.deadzone >= 0 && h.deadzone < 1)) throw ValidationError("header: deadzone must be in [0, 1)");
  for (int id : h.targets) {
    const bool known = std::any_of(h.sectors.begin(), h.sectors.end(),
                                   [&](const ObstacleSector& s) { return s.id == id; });
    if (!known) throw ValidationError("header: target sector " + std::to_string(id) + " not listed");
  }
}

}  // namespace

void EpisodeLog::validate() const {
  check_header(header);
  TickChecker checker(header);
  for (std::size_t i = 0; i < ticks.size(); ++i) checker.check(ticks[i], "tick " + std::to_string(i));
  if (!std::isfinite(footer.sim_duration)) throw ValidationError("footer: non-finite duration");
}

// ---- JSON ----------------------------------------------------------------------------

namespace {

Json to_json(const LogHeader& h) {
  Json j;
  j["type"] = "header";
  j["schema"] = h.schema;
  j["method"] = h.method;
  j["arena_id"] = h.arena_id;
  j["arena_hash"] = h.arena_hash;
  j["geometry_hash"] = h.geometry_hash;
  j["dt"] = h.dt;
  j["start_time"] = h.start_time ? Json(*h.start_time) : Json(nullptr);
  j["d_d"] = h.d_d;
  j["line"] = {{"start", {h.line.start.x(), h.line.start.y()}}, {"heading", h.line.heading}};
  Json sectors = Json::array();
  for (const auto& s : h.sectors) {
    sectors.push_back({{"id", s.id}, {"start", s.start}, {"end", s.end}, {"windows", s.windows}});
  }
  j["sectors"] = sectors;
  j["targets"] = h.targets;
  j["buttons"] = h.buttons;
  j["axes"] = h.axes;
  j["deadzone"] = h.deadzone;
  j["seed"] = h.seed;
  return j;
}

Json to_json(const TickRecord& r) {
  Json j;
  j["type"] = "tick";
  j["t"] = r.t;
  j["x"] = r.pose.x;
  j["y"] = r.pose.y;
  j["z"] = r.pose.z;
  j["yaw"] = r.pose.yaw;
  j["pitch"] = r.pose.pitch;
  j["roll"] = r.pose.roll;
  j["theta"] = {r.theta[0], r.theta[1], r.theta[2], r.theta[3]};
  j["v_cmd"] = r.v_cmd;
  j["w_cmd"] = r.omega_cmd;
  j["ground_speed"] = r.ground_speed;
  j["d"] = r.clearance;
  j["accel"] = {r.accel[0], r.accel[1], r.accel[2]};
  Json cmds = Json::array();
  for (const auto& lf : r.cmds) {
    Json c;
    c["t"] = lf.frame.t;
    c["rx"] = lf.rx;
    c["b"] = lf.frame.buttons;
    c["a"] = lf.frame.axes;
    cmds.push_back(std::move(c));
  }
  j["cmds"] = std::move(cmds);
  j["mode"] = r.mode;
  j["stuck"] = r.stuck;
  return j;
}

Json to_json(const LogFooter& f) {
  Json j;
  j["type"] = "footer";
  j["status"] = std::string(to_string(f.status));
  j["reason"] = f.reason;
  j["sim_duration"] = f.sim_duration;
  j["wall_clock"] = f.wall_clock ? Json(*f.wall_clock) : Json(nullptr);
  return j;
}

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

LogHeader header_from_json(const Json& j) {
  LogHeader h;
  h.schema = get<std::string>(j, "schema");
  const std::string prefix = "flipperbench.episode/";
  if (h.schema.rfind(prefix, 0) != 0) throw ParseError("not an episode log (schema '" + h.schema + "')");
  const std::string version = h.schema.substr(prefix.size());
  if (version.substr(0, version.find('.')) != "1") {
    throw ParseError("unsupported log schema version " + version);
  }
  h.method = get<std::string>(j, "method");
  h.arena_id = get<std::string>(j, "arena_id");
  h.arena_hash = get<std::string>(j, "arena_hash");
  h.geometry_hash = get<std::string>(j, "geometry_hash");
  h.dt = get<double>(j, "dt");
  if (j.contains("start_time") && !j["start_time"].is_null()) h.start_time = get<std::string>(j, "start_time");
  h.d_d = get<double>(j, "d_d");
  const Json line = get<Json>(j, "line");
  const auto start = get<std::vector<double>>(line, "start");
  if (start.size() != 2) throw ParseError("line.start must have two entries");
  h.line.start = {start[0], start[1]};
  h.line.heading = get<double>(line, "heading");
  for (const auto& s : get<Json>(j, "sectors")) {
    h.sectors.push_back({get<int>(s, "id"), get<double>(s, "start"), get<double>(s, "end"),
                         s.contains("windows") ? get<int>(s, "windows") : 10});
  }
  h.targets = get<std::vector<int>>(j, "targets");
  h.buttons = get<std::vector<std::string>>(j, "buttons");
  h.axes = get<std::vector<std::string>>(j, "axes");
  h.deadzone = get<double>(j, "deadzone");
  h.seed = get<std::uint64_t>(j, "seed");
  return h;
}

TickRecord tick_from_json(const Json& j) {
  TickRecord r;
  r.t = get<double>(j, "t");
  r.pose.x = get<double>(j, "x");
  r.pose.y = get<double>(j, "y");
  r.pose.z = get<double>(j, "z");
  r.pose.yaw = get<double>(j, "yaw");
  r.pose.pitch = get<double>(j, "pitch");
  r.pose.roll = get<double>(j, "roll");
  const auto theta = get<std::vector<double>>(j, "theta");
  if (theta.size() != 4) throw ParseError("theta must have four entries");
  r.theta = FlipperAngles(theta[0], theta[1], theta[2], theta[3]);
  r.v_cmd = get<double>(j, "v_cmd");
  r.omega_cmd = get<double>(j, "w_cmd");
  r.ground_speed = get<double>(j, "ground_speed");
  r.clearance = get<double>(j, "d");
  const auto accel = get<std::vector<double>>(j, "accel");
  if (accel.size() != 3) throw ParseError("accel must have three entries");
  r.accel = Eigen::Vector3d(accel[0], accel[1], accel[2]);
  for (const auto& c : get<Json>(j, "cmds")) {
    LoggedFrame lf;
    lf.frame.t = get<double>(c, "t");
    lf.rx = get<double>(c, "rx");
    lf.frame.buttons = get<std::vector<std::uint8_t>>(c, "b");
    lf.frame.axes = get<std::vector<double>>(c, "a");
    r.cmds.push_back(std::move(lf));
  }
  r.mode = j.contains("mode") ? get<std::string>(j, "mode") : "";
  r.stuck = j.contains("stuck") ? get<bool>(j, "stuck") : false;
  return r;
}

LogFooter footer_from_json(const Json& j) {
  LogFooter f;
  f.status = status_from_string(get<std::string>(j, "status"));
  f.reason = get<std::string>(j, "reason");
  f.sim_duration = get<double>(j, "sim_duration");
  if (j.contains("wall_clock") && !j["wall_clock"].is_null()) f.wall_clock = get<double>(j, "wall_clock");
  return f;
}

}  // namespace

void write_log(const EpisodeLog& log, std::ostream& out) {
  log.validate();
  // Serialize fully first so a failure cannot leave a partial file behind.
  std::string text;
  text += to_json(log.header).dump() + '\n';
  for (const auto& t : log.ticks) text += to_json(t).dump() + '\n';
  text += to_json(log.footer).dump() + '\n';
  out << text;
}

std::string log_to_string(const EpisodeLog& log) {
  std::ostringstream s;
  write_log(log, s);
  return s.str();
}

void write_log(const EpisodeLog& log, const std::filesystem::path& path) {
  const std::string text = log_to_string(log);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

EpisodeLog read_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  long lineno = 0;
  bool have_header = false, have_footer = false;
  std::optional<TickChecker> checker;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (have_footer) throw ParseError("content after footer", lineno);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", lineno);
    try {
      const std::string type = get<std::string>(j, "type");
      if (!have_header) {
        if (type != "header") throw ParseError("first record must be the header");
        log.header = header_from_json(j);
        check_header(log.header);
        checker.emplace(log.header);
        have_header = true;
      } else if (type == "tick") {
        log.ticks.push_back(tick_from_json(j));
        checker->check(log.ticks.back(), "line " + std::to_string(lineno));
      } else if (type == "footer") {
        log.footer = footer_from_json(j);
        have_footer = true;
      } else {
        throw ParseError("unexpected record type '" + type + "'");
      }
    } catch (const ParseError& e) {
      if (e.line() > 0) throw;
      throw ParseError(e.what(), lineno);
    }
  }
  if (!have_header) throw ParseError("empty log");
  if (!have_footer) throw ParseError("truncated log", lineno);
  return log;
}

EpisodeLog log_from_string(const std::string& text) {
  std::istringstream s(text);
  return read_log(s);
}

EpisodeLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return read_log(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> list_logs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return out;
}

// ---- CSV import ----------------------------------------------------------------------

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int index(const std::string& name, const char* what) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return int(i);
    }
    throw ConfigError(std::string(what) + " CSV has no column '" + name + "'");
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_csv(std::istream& in, const char* what) {
  Table t;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto cells = split(line);
    if (t.columns.empty()) {
      t.columns = std::move(cells);
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw ParseError(std::string(what) + " CSV row has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(t.columns.size()),
                       lineno);
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw ParseError(std::string(what) + " CSV cell '" + c + "' is not a number", lineno);
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void put(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

EpisodeLog import_external(std::istream& commands_csv, std::istream& trajectory_csv,
                           const ImportMapping& m, const ArenaSpec& arena,
                           const RobotGeometry& geometry) {
  const Table traj = read_csv(trajectory_csv, "trajectory");
  const Table cmds = read_csv(commands_csv, "command");
  if (traj.rows.empty()) throw AlignmentError("trajectory stream is empty");

  EpisodeLog log;
  auto& h = log.header;
  h.method = m.method;
  h.arena_id = arena.id;
  h.arena_hash = arena.hash();
  h.geometry_hash = geometry.hash();
  h.d_d = geometry.clearance;
  h.line = arena.line;
  h.sectors = arena.sectors;
  for (const auto& s : arena.sectors) h.targets.push_back(s.id);
  h.buttons = m.button_columns;
  h.axes = m.axis_columns;
  h.deadzone = m.deadzone;

  const int ti = traj.index(m.time_column, "trajectory");
  const int xi = traj.index(m.x, "trajectory"), yi = traj.index(m.y, "trajectory");
  const int zi = traj.index(m.z, "trajectory");
  const int yawi = traj.index(m.yaw, "trajectory"), pi = traj.index(m.pitch, "trajectory");
  const int ri = traj.index(m.roll, "trajectory"), di = traj.index(m.clearance, "trajectory");
  std::array<int, 4> thi;
  for (int k = 0; k < 4; ++k) thi[std::size_t(k)] = traj.index(m.theta[std::size_t(k)], "trajectory");
  std::array<int, 3> ai;
  for (int k = 0; k < 3; ++k) ai[std::size_t(k)] = traj.index(m.accel[std::size_t(k)], "trajectory");
  const int gi = m.ground_speed.empty() ? -1 : traj.index(m.ground_speed, "trajectory");

  for (std::size_t k = 0; k < traj.rows.size(); ++k) {
    const auto& row = traj.rows[k];
    TickRecord r;
    r.t = row[std::size_t(ti)];
    r.pose = {row[std::size_t(xi)], row[std::size_t(yi)], row[std::size_t(zi)],
              row[std::size_t(yawi)], row[std::size_t(pi)], row[std::size_t(ri)]};
    for (int f = 0; f < 4; ++f) r.theta[f] = row[std::size_t(thi[std::size_t(f)])];
    for (int c = 0; c < 3; ++c) r.accel[c] = row[std::size_t(ai[std::size_t(c)])];
    r.clearance = std::max(0.0, row[std::size_t(di)]);
    if (gi >= 0) {
      r.ground_speed = row[std::size_t(gi)];
    } else if (k > 0) {
      const auto& prev = log.ticks.back();
      const double dt = r.t - prev.t;
      r.ground_speed = dt > 0 ? std::hypot(r.pose.x - prev.pose.x, r.pose.y - prev.pose.y) / dt : 0.0;
    }
    log.ticks.push_back(std::move(r));
  }
  if (log.ticks.size() > 1) h.dt = log.ticks[1].t - log.ticks[0].t;

  const std::string& tname = m.command_time_column.empty() ? m.time_column : m.command_time_column;
  if (cmds.rows.empty()) {
    LoggedFrame lf;
    lf.frame = CommandFrame{log.ticks.front().t, std::vector<std::uint8_t>(h.buttons.size(), 0),
                            std::vector<double>(h.axes.size(), 0.0)};
    lf.rx = lf.frame.t;
    log.ticks.front().cmds.push_back(std::move(lf));
  } else {
    const int cti = cmds.index(tname, "command");
    std::vector<int> bi, axi;
    for (const auto& b : m.button_columns) bi.push_back(cmds.index(b, "command"));
    for (const auto& a : m.axis_columns) axi.push_back(cmds.index(a, "command"));
    const double first = cmds.rows.front()[std::size_t(cti)];
    const double last = cmds.rows.back()[std::size_t(cti)];
    if (last < log.ticks.front().t || first > log.ticks.back().t) {
      throw AlignmentError("command and trajectory streams do not overlap in time");
    }
    std::size_t k = 0;
    for (const auto& row : cmds.rows) {
      LoggedFrame lf;
      lf.frame.t = row[std::size_t(cti)];
      for (int b : bi) lf.frame.buttons.push_back(row[std::size_t(b)] != 0 ? 1 : 0);
      for (int a : axi) lf.frame.axes.push_back(row[std::size_t(a)]);
      // A command cannot affect an earlier state: attach to the first tick at
      // or after it. Frames past the trajectory end are dropped.
      while (k < log.ticks.size() && log.ticks[k].t < lf.frame.t) ++k;
      if (k == log.ticks.size()) break;
      lf.rx = log.ticks[k].t;
      log.ticks[k].cmds.push_back(std::move(lf));
    }
  }

  const auto& end = log.ticks.back();
  log.footer.sim_duration = end.t - log.ticks.front().t;
  if (m.status) {
    log.footer.status = *m.status;
  } else {
    const double s = arena.line.arc_length(end.pose.x, end.pose.y);
    const bool done = !arena.sectors.empty() && s >= arena.sectors.back().end;
    log.footer.status = done ? EpisodeStatus::kCompleted : EpisodeStatus::kFailed;
    log.footer.reason = done ? "" : "incomplete";
  }
  log.validate();
  return log;
}

void export_external(const EpisodeLog& log, const ImportMapping& m, std::ostream& commands_csv,
                     std::ostream& trajectory_csv) {
  const std::string& tname = m.command_time_column.empty() ? m.time_column : m.command_time_column;
  commands_csv << tname;
  for (const auto& b : m.button_columns) commands_csv << ',' << b;
  for (const auto& a : m.axis_columns) commands_csv << ',' << a;
  commands_csv << '\n';
  for (const auto& tick : log.ticks) {
    for (const auto& lf : tick.cmds) {
      put(commands_csv, lf.frame.t);
      for (auto b : lf.frame.buttons) commands_csv << ',' << int(b);
      for (double a : lf.frame.axes) {
        commands_csv << ',';
        put(commands_csv, a);
      }
      commands_csv << '\n';
    }
  }

  trajectory_csv << m.time_column << ',' << m.x << ',' << m.y << ',' << m.z << ',' << m.yaw << ','
                 << m.pitch << ',' << m.roll;
  for (const auto& c : m.theta) trajectory_csv << ',' << c;
  trajectory_csv << ',' << m.clearance;
  for (const auto& c : m.accel) trajectory_csv << ',' << c;
  if (!m.ground_speed.empty()) trajectory_csv << ',' << m.ground_speed;
  trajectory_csv << '\n';
  for (const auto& r : log.ticks) {
    const double vals[] = {r.t, r.pose.x, r.pose.y, r.pose.z, r.pose.yaw, r.pose.pitch, r.pose.roll,
                           r.theta[0], r.theta[1], r.theta[2], r.theta[3], r.clearance,
                           r.accel[0], r.accel[1], r.accel[2]};
    bool first = true;
    for (double v : vals) {
      if (!first) trajectory_csv << ',';
      first = false;
      put(trajectory_csv, v);
    }
    if (!m.ground_speed.empty()) {
      trajectory_csv << ',';
      put(trajectory_csv, r.ground_speed);
    }
    trajectory_csv << '\n';
  }
}

}  // namespace flipperbench
