#include "flipperbench/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include "toml.hpp"

#include "flipperbench/error.hpp"

namespace flipperbench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

toml::table parse_toml(std::string_view text, std::string_view origin) {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(origin) + ":" + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }
}

// Typed access to one table that remembers which keys were read, so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

  bool has(std::string_view key) const { return table_ && table_->contains(key); }

  const toml::node* node(std::string_view key) {
    if (!table_) return nullptr;
    seen_.insert(std::string(key));
    return table_->get(key);
  }

  std::string where(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  void number(std::string_view key, double& out) {
    if (const auto* n = node(key)) {
      const auto v = n->value<double>();
      if (!v || !(n->is_floating_point() || n->is_integer())) {
        throw ConfigError(where(key) + " must be a number");
      }
      out = *v;
    }
  }

  void angle(std::string_view deg_key, double& out_rad) {
    double v = out_rad / kDeg;
    const bool present = has(deg_key);
    number(deg_key, v);
    if (present) out_rad = v * kDeg;
  }

  void integer(std::string_view key, int& out) {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v) throw ConfigError(where(key) + " must be an integer");
      out = int(*v);
    }
  }

  void unsigned64(std::string_view key, std::uint64_t& out) {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 0) throw ConfigError(where(key) + " must be a non-negative integer");
      out = std::uint64_t(*v);
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<bool>();
      if (!v) throw ConfigError(where(key) + " must be true or false");
      out = *v;
    }
  }

  void string(std::string_view key, std::string& out) {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<std::string>();
      if (!v) throw ConfigError(where(key) + " must be a string");
      out = *v;
    }
  }

  template <std::size_t N>
  void numbers(std::string_view key, std::array<double, N>& out) {
    std::vector<double> v;
    if (!number_list(key, v)) return;
    if (v.size() != N) {
      throw ConfigError(where(key) + " must have " + std::to_string(N) + " entries");
    }
    std::copy(v.begin(), v.end(), out.begin());
  }

  bool number_list(std::string_view key, std::vector<double>& out) {
    const auto* n = node(key);
    if (!n) return false;
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError(where(key) + " must be an array");
    out.clear();
    for (const auto& e : *arr) {
      const auto v = e.value<double>();
      if (!v) throw ConfigError(where(key) + " must hold numbers");
      out.push_back(*v);
    }
    return true;
  }

  void vec2(std::string_view key, Eigen::Vector2d& out) {
    std::array<double, 2> a{out.x(), out.y()};
    numbers(key, a);
    out = Eigen::Vector2d(a[0], a[1]);
  }

  template <std::size_t N>
  void strings(std::string_view key, std::array<std::string, N>& out) {
    std::vector<std::string> v;
    if (!string_list(key, v)) return;
    if (v.size() != N) {
      throw ConfigError(where(key) + " must have " + std::to_string(N) + " entries");
    }
    std::copy(v.begin(), v.end(), out.begin());
  }

  bool string_list(std::string_view key, std::vector<std::string>& out) {
    const auto* n = node(key);
    if (!n) return false;
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError(where(key) + " must be an array");
    out.clear();
    for (const auto& e : *arr) {
      const auto v = e.value_exact<std::string>();
      if (!v) throw ConfigError(where(key) + " must hold strings");
      out.push_back(*v);
    }
    return true;
  }

  void int_list(std::string_view key, std::vector<int>& out) {
    const auto* n = node(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError(where(key) + " must be an array");
    out.clear();
    for (const auto& e : *arr) {
      const auto v = e.value_exact<std::int64_t>();
      if (!v) throw ConfigError(where(key) + " must hold integers");
      out.push_back(int(*v));
    }
  }

  Section table(std::string_view key) {
    const auto* n = node(key);
    if (n && !n->is_table()) throw ConfigError(where(key) + " must be a table");
    return Section(n ? n->as_table() : nullptr, where(key));
  }

  std::vector<Section> tables(std::string_view key) {
    std::vector<Section> out;
    const auto* n = node(key);
    if (!n) return out;
    const auto* arr = n->as_array();
    if (!arr || !arr->is_array_of_tables()) throw ConfigError(where(key) + " must be an array of tables");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      out.emplace_back(arr->get(i)->as_table(), where(key) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  // Keys of this table, for free-form maps such as [cl_min].
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    if (table_) {
      for (const auto& [k, v] : *table_) out.emplace_back(k.str());
    }
    return out;
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) throw ConfigError("unknown key '" + where(k.str()) + "'");
    }
  }

 private:
  const toml::table* table_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---- sections -------------------------------------------------------------------

void read_arena(Section s, ArenaSpec& a) {
  std::string preset = "default";
  s.string("preset", preset);
  if (preset == "default") {
    a = default_arena();
  } else if (preset == "empty") {
    a = ArenaSpec{};
    a.obstacles.clear();
    a.sectors.clear();
  } else {
    throw ConfigError(s.where("preset") + " must be \"default\" or \"empty\"");
  }
  s.string("id", a.id);
  s.number("resolution", a.resolution);
  s.vec2("map_min", a.map_min);
  s.vec2("map_max", a.map_max);
  {
    auto l = s.table("line");
    l.vec2("start", a.line.start);
    l.number("heading", a.line.heading);
    l.angle("heading_deg", a.line.heading);
    l.finish();
  }
  {
    auto p = s.table("pallet");
    p.number("length", a.pallet.length);
    p.number("width", a.pallet.width);
    p.number("height", a.pallet.height);
    p.finish();
  }
  if (s.has("sectors")) {
    a.sectors.clear();
    for (auto t : s.tables("sectors")) {
      ObstacleSector sec;
      t.integer("id", sec.id);
      t.number("start", sec.start);
      t.number("end", sec.end);
      t.integer("windows", sec.windows);
      t.finish();
      a.sectors.push_back(sec);
    }
  }
  if (s.has("obstacles")) {
    a.obstacles.clear();
    for (auto t : s.tables("obstacles")) {
      ObstacleDesc o;
      std::string kind = "pallet-stack";
      t.string("kind", kind);
      o.kind = obstacle_kind_from_string(kind);
      // Pallet-shaped kinds start from the configured pallet.
      if (o.kind == ObstacleKind::kPalletStack || o.kind == ObstacleKind::kRotatedPallet) {
        o.length = a.pallet.length;
        o.width = a.pallet.width;
        o.height = a.pallet.height;
      }
      if (t.has("along")) {
        // Placement by arc length along the traversal line, plus a lateral offset.
        double along = 0, lateral = 0;
        t.number("along", along);
        t.number("lateral", lateral);
        const Eigen::Vector2d d = a.line.direction();
        o.position = a.line.point_at(along) + lateral * Eigen::Vector2d(-d.y(), d.x());
      } else {
        t.vec2("position", o.position);
      }
      t.number("yaw", o.yaw);
      t.angle("yaw_deg", o.yaw);
      t.number("length", o.length);
      t.number("width", o.width);
      t.number("height", o.height);
      t.integer("stack", o.stack);
      t.integer("steps", o.steps);
      t.number("gap", o.gap);
      t.number("gap_height", o.gap_height);
      t.number("depth", o.depth);
      t.finish();
      a.obstacles.push_back(o);
    }
  }
  s.finish();
}

void read_geometry(Section s, RobotGeometry& g) {
  s.number("body_length", g.body_length);
  s.number("body_width", g.body_width);
  s.number("body_height", g.body_height);
  s.number("com_height", g.com_height);
  s.number("clearance", g.clearance);
  s.number("flipper_length", g.flipper_length);
  s.number("flipper_width", g.flipper_width);
  s.number("flipper_limit", g.flipper_limit);
  s.angle("flipper_limit_deg", g.flipper_limit);
  s.integer("track_samples", g.track_samples);
  s.integer("flipper_samples", g.flipper_samples);
  s.integer("belly_cols", g.belly_cols);
  s.integer("belly_rows", g.belly_rows);
  if (s.has("pivots")) {
    const auto* n = s.node("pivots");
    const auto* arr = n->as_array();
    if (!arr || arr->size() != 4) throw ConfigError(s.where("pivots") + " must hold 4 [x, y, z] entries");
    for (std::size_t i = 0; i < 4; ++i) {
      const auto* p = arr->get(i)->as_array();
      if (!p || p->size() != 3) throw ConfigError(s.where("pivots") + " entries must be [x, y, z]");
      for (std::size_t k = 0; k < 3; ++k) {
        const auto v = p->get(k)->value<double>();
        if (!v) throw ConfigError(s.where("pivots") + " entries must be numbers");
        g.pivots[i][Eigen::Index(k)] = *v;
      }
    }
    g.custom_pivots = true;
  }
  s.finish();
}

void read_policy(Section s, PolicyConfig& p) {
  s.number("gain", p.gain);
  s.number("oafc_lookahead", p.oafc_lookahead);
  s.integer("oafc_factor", p.oafc_factor);
  s.number("theta_dot_max", p.theta_dot_max);
  s.number("tracking_rate", p.tracking_rate);
  s.number("tracking_gain", p.tracking_gain);
  s.finish();
}

void read_anti_stuck(Section s, AntiStuckConfig& a) {
  s.number("v_cmd_min", a.v_cmd_min);
  s.number("ground_speed_max", a.ground_speed_max);
  s.number("persistence", a.persistence);
  s.number("release_clearance", a.release_clearance);
  s.number("cooldown", a.cooldown);
  s.finish();
}

void read_modes(Section s, ModeTable& t) {
  for (auto& m : t.modes) {
    std::array<double, 4> deg{};
    for (int i = 0; i < 4; ++i) deg[std::size_t(i)] = m.targets[i] / kDeg;
    const std::string key(to_string(m.name));
    if (!s.has(key)) {
      s.node(key);
      continue;
    }
    s.numbers(key, deg);
    for (int i = 0; i < 4; ++i) m.targets[i] = deg[std::size_t(i)] * kDeg;
  }
  s.finish();
}

void read_mapping(Section s, MappingConfig& m) {
  s.number("v_max", m.v_max);
  s.number("omega_max", m.omega_max);
  s.number("theta_dot_max", m.theta_dot_max);
  s.string("drive_axis", m.drive_axis);
  s.string("turn_axis", m.turn_axis);
  s.string("flipper_axis", m.flipper_axis);
  s.strings("flipper_modifiers", m.flipper_modifiers);
  s.strings("mode_buttons", m.mode_buttons);
  s.string("front_mode_toggle", m.front_mode_toggle);
  s.finish();
}

void read_controller(Section s, ControllerLayout& l) {
  s.string_list("buttons", l.buttons);
  s.string_list("axes", l.axes);
  s.number("deadzone", l.deadzone);
  s.finish();
}

void read_sim(Section s, SimOptions& o) {
  s.number("traction_fraction", o.traction_fraction);
  s.number("penetration_tolerance", o.settle.penetration_tolerance);
  s.number("contact_tolerance", o.settle.contact_tolerance);
  s.integer("max_iterations", o.settle.max_iterations);
  s.finish();
}

void read_episode(Section s, EpisodeConfig& e) {
  s.number("dt", e.dt);
  s.number("sector_timeout", e.sector_timeout);
  s.angle("capsize_deg", e.capsize_limit);
  s.number("start_offset", e.start_offset);
  s.number("lateral_offset", e.lateral_offset);
  s.angle("start_yaw_deg", e.start_yaw);
  std::array<double, 4> th{};
  for (int i = 0; i < 4; ++i) th[std::size_t(i)] = e.initial_theta[i] / kDeg;
  s.numbers("initial_theta_deg", th);
  for (int i = 0; i < 4; ++i) e.initial_theta[i] = th[std::size_t(i)] * kDeg;
  s.number("max_duration", e.max_duration);
  s.int_list("targets", e.targets);
  s.finish();
}

void read_scripted(Section s, ScriptedOperator::Options& o) {
  s.number("v_nom", o.driver.v_nom);
  s.number("heading_gain", o.driver.heading_gain);
  s.number("capture_radius", o.driver.capture_radius);
  s.number("reaction_min", o.reaction_min);
  s.number("reaction_max", o.reaction_max);
  s.number("press_duration", o.press_duration);
  s.number("flipper_tolerance", o.flipper_tolerance);
  s.number("oafc_lead", o.oafc_lead);
  s.number("oafc_trail", o.oafc_trail);
  s.number("stall_speed", o.stall_speed);
  s.number("stall_release", o.stall_release);
  s.finish();
}

void read_bridge(Section s, BridgeConfig& b) {
  s.string("host", b.host);
  s.integer("port", b.port);
  s.number("time_scale", b.time_scale);
  s.number("state_rate", b.state_rate);
  s.string("method", b.method);
  s.finish();
}

void read_scoring(Section s, ScoringOptions& o) {
  s.boolean("max_clearance_windows", o.max_clearance_windows);
  s.finish();
}

void check_positive(double v, const char* what) {
  if (!(v > 0)) throw ConfigError(std::string(what) + " must be > 0");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  // Keep floats looking like floats.
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

void BenchConfig::validate() const {
  arena.validate();
  geometry.validate();
  PolicyConfig p = policy;
  p.d_d = geometry.clearance;
  p.validate();
  if (layout.buttons.empty() && layout.axes.empty()) throw ConfigError("controller has no inputs");
  if (!(layout.deadzone >= 0 && layout.deadzone < 1)) throw ConfigError("controller deadzone must be in [0, 1)");
  layout.axis(mapping.drive_axis);
  layout.axis(mapping.turn_axis);
  layout.axis(mapping.flipper_axis);
  for (const auto& b : mapping.flipper_modifiers) layout.button(b);
  for (const auto& b : mapping.mode_buttons) layout.button(b);
  layout.button(mapping.front_mode_toggle);
  check_positive(mapping.v_max, "mapping.v_max");
  check_positive(mapping.omega_max, "mapping.omega_max");
  check_positive(mapping.theta_dot_max, "mapping.theta_dot_max");
  if (!(sim.traction_fraction >= 0 && sim.traction_fraction <= 1)) {
    throw ConfigError("sim.traction_fraction must be in [0, 1]");
  }
  if (!(episode.dt > 0) || episode.dt > 0.1) throw ConfigError("episode.dt must be in (0, 0.1]");
  check_positive(episode.sector_timeout, "episode.sector_timeout");
  check_positive(episode.capsize_limit, "episode.capsize_deg");
  for (int id : episode.targets) arena.sector(id);
  check_positive(scripted.driver.v_nom, "scripted.v_nom");
  check_positive(scripted.driver.capture_radius, "scripted.capture_radius");
  if (!(scripted.reaction_min >= 0 && scripted.reaction_max >= scripted.reaction_min)) {
    throw ConfigError("scripted reaction interval must satisfy 0 <= min <= max");
  }
  if (methods.empty()) throw ConfigError("methods must not be empty");
  for (const auto& m : methods) make_policy(m, p, mapping);
  if (bridge.port < 0 || bridge.port > 65535) throw ConfigError("bridge.port must be in [0, 65535]");
  check_positive(bridge.time_scale, "bridge.time_scale");
  check_positive(bridge.state_rate, "bridge.state_rate");
  make_policy(bridge.method, p, mapping);
}

SimContext BenchConfig::context() const {
  return make_context(arena, geometry, policy, mapping, layout, sim);
}

// Prefixes errors raised after parsing with where the text came from.
template <class F>
auto with_origin(std::string_view origin, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.starts_with(std::string(origin) + ":")) throw;
    throw ConfigError(std::string(origin) + ": " + what);
  }
}

BenchConfig parse_config(std::string_view text, std::string_view origin) {
  return with_origin(origin, [&] {
    const toml::table root = parse_toml(text, origin);
    BenchConfig c;
    Section s(&root, "");
    s.unsigned64("seed", c.seed);
    s.string_list("methods", c.methods);
    std::string passes = "full";
    s.string("passes", passes);
    if (passes == "full") {
      c.passes = PassMode::kFull;
    } else if (passes == "per-sector") {
      c.passes = PassMode::kPerSector;
    } else {
      throw ConfigError("passes must be \"full\" or \"per-sector\"");
    }
    if (s.has("arena")) read_arena(s.table("arena"), c.arena);
    read_geometry(s.table("robot"), c.geometry);
    read_policy(s.table("policy"), c.policy);
    read_anti_stuck(s.table("anti_stuck"), c.policy.anti_stuck);
    read_modes(s.table("modes"), c.policy.modes);
    read_mapping(s.table("mapping"), c.mapping);
    read_controller(s.table("controller"), c.layout);
    read_sim(s.table("sim"), c.sim);
    read_episode(s.table("episode"), c.episode);
    read_scripted(s.table("scripted"), c.scripted);
    read_bridge(s.table("bridge"), c.bridge);
    read_scoring(s.table("scoring"), c.scoring);
    s.finish();
    c.policy.d_d = c.geometry.clearance;
    c.scoring.deadzone = c.layout.deadzone;
    c.validate();
    return c;
  });
}

BenchConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.string());
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return std::filesystem::path(*flag);
  if (const char* env = std::getenv("FLIPPERBENCH_CONFIG"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

ArenaSpec parse_arena(std::string_view text, std::string_view origin) {
  const toml::table root = parse_toml(text, origin);
  ArenaSpec a;
  if (root.contains("arena")) {
    Section top(&root, "");
    read_arena(top.table("arena"), a);
    top.finish();
  } else {
    read_arena(Section(&root, ""), a);
  }
  a.validate();
  return a;
}

ArenaSpec load_arena(const std::filesystem::path& path) {
  return parse_arena(read_file(path), path.string());
}

std::string arena_to_toml(const ArenaSpec& a) {
  std::ostringstream o;
  auto v2 = [](const Eigen::Vector2d& v) {
    return "[" + format_double(v.x()) + ", " + format_double(v.y()) + "]";
  };
  o << "preset = \"empty\"\n";
  o << "id = \"" << a.id << "\"\n";
  o << "resolution = " << format_double(a.resolution) << "\n";
  o << "map_min = " << v2(a.map_min) << "\n";
  o << "map_max = " << v2(a.map_max) << "\n";
  o << "line = { start = " << v2(a.line.start) << ", heading = " << format_double(a.line.heading) << " }\n";
  o << "pallet = { length = " << format_double(a.pallet.length) << ", width = "
    << format_double(a.pallet.width) << ", height = " << format_double(a.pallet.height) << " }\n";
  for (const auto& s : a.sectors) {
    o << "\n[[sectors]]\nid = " << s.id << "\nstart = " << format_double(s.start)
      << "\nend = " << format_double(s.end) << "\nwindows = " << s.windows << "\n";
  }
  for (const auto& ob : a.obstacles) {
    o << "\n[[obstacles]]\nkind = \"" << to_string(ob.kind) << "\"\n"
      << "position = " << v2(ob.position) << "\n"
      << "yaw = " << format_double(ob.yaw) << "\n"
      << "length = " << format_double(ob.length) << "\n"
      << "width = " << format_double(ob.width) << "\n"
      << "height = " << format_double(ob.height) << "\n"
      << "stack = " << ob.stack << "\n"
      << "steps = " << ob.steps << "\n"
      << "gap = " << format_double(ob.gap) << "\n"
      << "gap_height = " << format_double(ob.gap_height) << "\n"
      << "depth = " << format_double(ob.depth) << "\n";
  }
  return o.str();
}

CalibrationTable parse_calibration(std::string_view text, std::string_view origin) {
  const toml::table root = parse_toml(text, origin);
  Section s(&root, "");
  CalibrationTable t;
  s.number("d_d", t.d_d);
  s.number("s_max", t.s_max);
  auto per_sector = [&](std::string_view key, std::map<int, double>& out) {
    Section sub = s.table(key);
    for (const auto& k : sub.keys()) {
      int id = 0;
      const auto r = std::from_chars(k.data(), k.data() + k.size(), id);
      if (r.ec != std::errc() || r.ptr != k.data() + k.size()) {
        throw ConfigError(std::string(origin) + ": " + sub.where(k) + " is not a sector id");
      }
      double v = 0;
      sub.number(k, v);
      out[id] = v;
    }
    sub.finish();
  };
  per_sector("cl_min", t.cl_min);
  per_sector("s_max_override", t.s_max_override);
  s.finish();
  try {
    t.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return t;
}

CalibrationTable load_calibration(const std::filesystem::path& path) {
  return parse_calibration(read_file(path), path.string());
}

std::string calibration_to_toml(const CalibrationTable& t) {
  std::ostringstream o;
  o << "d_d = " << format_double(t.d_d) << "\n";
  o << "s_max = " << format_double(t.s_max) << "\n";
  o << "\n[cl_min]\n";
  for (const auto& [id, v] : t.cl_min) o << '"' << id << "\" = " << format_double(v) << "\n";
  if (!t.s_max_override.empty()) {
    o << "\n[s_max_override]\n";
    for (const auto& [id, v] : t.s_max_override) o << '"' << id << "\" = " << format_double(v) << "\n";
  }
  return o.str();
}

ImportMapping parse_import_mapping(std::string_view text, std::string_view origin) {
  const toml::table root = parse_toml(text, origin);
  Section s(&root, "");
  ImportMapping m;
  s.string("method", m.method);
  s.number("deadzone", m.deadzone);
  if (s.has("status")) {
    std::string st;
    s.string("status", st);
    try {
      m.status = status_from_string(st);
    } catch (const Error&) {
      throw ConfigError(std::string(origin) + ": status must be completed, failed or aborted");
    }
  }
  {
    auto c = s.table("commands");
    c.string("time", m.command_time_column);
    c.string_list("buttons", m.button_columns);
    c.string_list("axes", m.axis_columns);
    c.finish();
  }
  {
    auto t = s.table("trajectory");
    t.string("time", m.time_column);
    t.string("x", m.x);
    t.string("y", m.y);
    t.string("z", m.z);
    t.string("yaw", m.yaw);
    t.string("pitch", m.pitch);
    t.string("roll", m.roll);
    t.strings("theta", m.theta);
    t.string("clearance", m.clearance);
    t.strings("accel", m.accel);
    t.string("ground_speed", m.ground_speed);
    t.finish();
  }
  s.finish();
  if (m.button_columns.empty() && m.axis_columns.empty()) {
    throw ConfigError(std::string(origin) + ": commands.buttons or commands.axes must list columns");
  }
  return m;
}

ImportMapping load_import_mapping(const std::filesystem::path& path) {
  return parse_import_mapping(read_file(path), path.string());
}

}  // namespace flipperbench
