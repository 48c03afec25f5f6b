#include "flipperbench/arena.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace flipperbench {

std::string_view to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::kPalletStack: return "pallet-stack";
    case ObstacleKind::kRotatedPallet: return "rotated-pallet";
    case ObstacleKind::kUpDownStaircase: return "up-down-staircase";
    case ObstacleKind::kTiltedBuriedPallet: return "tilted-buried-pallet";
    case ObstacleKind::kARamp: return "a-ramp";
    case ObstacleKind::kURamp: return "u-ramp";
    case ObstacleKind::kFlipperSwitchGap: return "flipper-switch-gap";
  }
  return "?";
}

ObstacleKind obstacle_kind_from_string(std::string_view name) {
  for (auto k : {ObstacleKind::kPalletStack, ObstacleKind::kRotatedPallet,
                 ObstacleKind::kUpDownStaircase, ObstacleKind::kTiltedBuriedPallet,
                 ObstacleKind::kARamp, ObstacleKind::kURamp, ObstacleKind::kFlipperSwitchGap}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown obstacle kind '" + std::string(name) + "'");
}

double ObstacleDesc::peak_height() const {
  switch (kind) {
    case ObstacleKind::kPalletStack:
    case ObstacleKind::kRotatedPallet:
    case ObstacleKind::kFlipperSwitchGap:
      return height * stack;
    default:
      return height;
  }
}

double ObstacleDesc::height_at(const Eigen::Vector2d& world) const {
  const Eigen::Vector2d d = world - position;
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double u = c * d.x() + s * d.y();
  const double v = -s * d.x() + c * d.y();
  if (std::abs(u) > 0.5 * length || std::abs(v) > 0.5 * width) return 0.0;
  const double q = (u + 0.5 * length) / length;  // 0 at entry edge, 1 at exit edge
  switch (kind) {
    case ObstacleKind::kPalletStack:
    case ObstacleKind::kRotatedPallet:
      return height * stack;
    case ObstacleKind::kUpDownStaircase: {
      const int treads = 2 * steps + 1;
      const int k = std::min(int(q * treads), treads - 1);
      const double riser = height / (steps + 1);
      return riser * std::min(k + 1, treads - k);
    }
    case ObstacleKind::kTiltedBuriedPallet:
      return height * q;
    case ObstacleKind::kARamp:
      return height * (1.0 - std::abs(2.0 * q - 1.0));
    case ObstacleKind::kURamp: {
      const double dip = depth > 0 ? depth : 0.5 * height;
      if (q < 0.25) return height * q / 0.25;
      if (q > 0.75) return height * (1.0 - q) / 0.25;
      return height - dip * std::sin(std::numbers::pi * (q - 0.25) / 0.5);
    }
    case ObstacleKind::kFlipperSwitchGap: {
      const double block = 0.5 * (length - gap);
      const double along = q * length;
      if (along < block || along > length - block) return height * stack;
      return gap_height;
    }
  }
  return 0.0;
}

std::array<Eigen::Vector2d, 4> ObstacleDesc::corners() const {
  const Eigen::Vector2d du(std::cos(yaw), std::sin(yaw));
  const Eigen::Vector2d dv(-std::sin(yaw), std::cos(yaw));
  const double hl = 0.5 * length, hw = 0.5 * width;
  return {position - hl * du - hw * dv, position + hl * du - hw * dv,
          position + hl * du + hw * dv, position - hl * du + hw * dv};
}

Eigen::Vector2d TraversalLine::direction() const {
  return {std::cos(heading), std::sin(heading)};
}

double TraversalLine::arc_length(double x, double y) const {
  return (Eigen::Vector2d(x, y) - start).dot(direction());
}

Eigen::Vector2d TraversalLine::point_at(double s) const { return start + s * direction(); }

void ArenaSpec::validate() const {
  if (!(resolution > 0)) throw ConfigError("arena resolution must be positive");
  const Eigen::Vector2d extent = map_max - map_min;
  if (extent.x() < resolution || extent.y() < resolution) {
    throw ConfigError("arena map must span at least two cells per axis");
  }
  double prev_end = -1e300;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    const auto& s = sectors[i];
    if (s.id != int(i) + 1) throw ConfigError("sector ids must be 1..N in order");
    if (s.length() < 3.0 - 1e-9 || s.length() > 9.0 + 1e-9) {
      throw ConfigError("sector " + std::to_string(s.id) + " length " +
                        std::to_string(s.length()) + " m outside [3, 9]");
    }
    if (s.start < prev_end - 1e-9) throw ConfigError("sectors overlap");
    if (s.windows < 1) throw ConfigError("sector window count must be positive");
    prev_end = s.end;
  }
  for (const auto& o : obstacles) {
    if (!(o.length > 0) || !(o.width > 0) || !(o.height >= 0) || o.stack < 1 || o.steps < 1) {
      throw ConfigError("obstacle dimensions must be positive");
    }
  }
}

std::string ArenaSpec::hash() const {
  std::ostringstream s;
  s.precision(17);
  s << id << ';' << resolution << ';' << map_min.transpose() << ';' << map_max.transpose() << ';'
    << line.start.transpose() << ';' << line.heading << ';';
  for (const auto& o : obstacles) {
    s << to_string(o.kind) << ',' << o.position.transpose() << ',' << o.yaw << ',' << o.length
      << ',' << o.width << ',' << o.height << ',' << o.stack << ',' << o.steps << ',' << o.gap
      << ',' << o.gap_height << ',' << o.depth << ';';
  }
  for (const auto& sec : sectors) s << sec.id << ',' << sec.start << ',' << sec.end << ';';
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

const ObstacleSector& ArenaSpec::sector(int id) const {
  for (const auto& s : sectors) {
    if (s.id == id) return s;
  }
  throw ConfigError("no sector " + std::to_string(id));
}

std::pair<double, double> ArenaSpec::obstacle_extent(std::size_t index) const {
  double lo = 1e300, hi = -1e300;
  for (const auto& c : obstacles.at(index).corners()) {
    const double s = line.arc_length(c.x(), c.y());
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

HeightMap build_arena(const ArenaSpec& spec) {
  spec.validate();
  const double res = spec.resolution;
  const Eigen::Index cols = Eigen::Index(std::floor((spec.map_max.x() - spec.map_min.x()) / res + 1e-9)) + 1;
  const Eigen::Index rows = Eigen::Index(std::floor((spec.map_max.y() - spec.map_min.y()) / res + 1e-9)) + 1;
  HeightMap::Grid h = HeightMap::Grid::Zero(rows, cols);
  const double max_x = spec.map_min.x() + res * double(cols - 1);
  const double max_y = spec.map_min.y() + res * double(rows - 1);
  for (std::size_t i = 0; i < spec.obstacles.size(); ++i) {
    const auto& o = spec.obstacles[i];
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& c : o.corners()) {
      x0 = std::min(x0, c.x());
      x1 = std::max(x1, c.x());
      y0 = std::min(y0, c.y());
      y1 = std::max(y1, c.y());
    }
    if (x0 < spec.map_min.x() || x1 > max_x || y0 < spec.map_min.y() || y1 > max_y) {
      throw BoundsError("obstacle " + std::to_string(i + 1) + " (" + std::string(to_string(o.kind)) +
                        ") lies outside the map bounds");
    }
    const Eigen::Index c0 = std::max<Eigen::Index>(0, Eigen::Index(std::floor((x0 - spec.map_min.x()) / res)));
    const Eigen::Index c1 = std::min<Eigen::Index>(cols - 1, Eigen::Index(std::ceil((x1 - spec.map_min.x()) / res)));
    const Eigen::Index r0 = std::max<Eigen::Index>(0, Eigen::Index(std::floor((y0 - spec.map_min.y()) / res)));
    const Eigen::Index r1 = std::min<Eigen::Index>(rows - 1, Eigen::Index(std::ceil((y1 - spec.map_min.y()) / res)));
    for (Eigen::Index r = r0; r <= r1; ++r) {
      for (Eigen::Index c = c0; c <= c1; ++c) {
        const Eigen::Vector2d p = spec.map_min + res * Eigen::Vector2d(double(c), double(r));
        h(r, c) = std::max(h(r, c), o.height_at(p));
      }
    }
  }
  return HeightMap(res, spec.map_min, std::move(h));
}

ArenaSpec default_arena() {
  ArenaSpec a;
  a.id = "default";
  const PalletDims p = a.pallet;
  const double deg = std::numbers::pi / 180.0;

  // Sector lengths in meters; obstacles start 1.5 m into their sector.
  const double lengths[13] = {4.5, 5.0, 6.0, 6.0, 6.0, 4.0, 4.5, 4.0, 4.5, 4.0, 4.0, 6.0, 6.5};
  double s = 0;
  for (int i = 0; i < 13; ++i) {
    a.sectors.push_back({i + 1, s, s + lengths[i], 10});
    s += lengths[i];
  }
  auto place = [&](int sector, double along, ObstacleDesc o) {
    // `along`: distance from sector start to the footprint center.
    o.position = a.line.point_at(a.sectors[sector - 1].start + along);
    a.obstacles.push_back(o);
  };
  auto pallet = [&](ObstacleKind kind, int stack, double yaw) {
    ObstacleDesc o;
    o.kind = kind;
    o.length = p.length;
    o.width = p.width;
    o.height = p.height;
    o.stack = stack;
    o.yaw = yaw;
    return o;
  };

  // 1: single pallet, entry and exit steps.
  place(1, 1.5 + 0.6, pallet(ObstacleKind::kPalletStack, 1, 0.0));
  // 2: pallet rotated against the driving direction.
  {
    auto o = pallet(ObstacleKind::kRotatedPallet, 1, 30 * deg);
    place(2, 2.3, o);
  }
  // 3: two pallet blocks over a shallow gap; support moves from front to rear flippers.
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kFlipperSwitchGap;
    o.length = 2.4;
    o.width = p.width;
    o.height = p.height;
    o.gap = 0.5;
    o.gap_height = 0.02;
    place(3, 1.5 + 1.2, o);
  }
  // 4: up-down staircase.
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kUpDownStaircase;
    o.length = 2.8;
    o.width = 1.0;
    o.height = 0.36;
    o.steps = 3;
    place(4, 1.5 + 1.4, o);
  }
  // 5: climb onto two stacks of double pallets.
  {
    auto o = pallet(ObstacleKind::kPalletStack, 2, 0.0);
    o.length = 2 * p.length;
    place(5, 1.5 + 1.2, o);
  }
  // 6-11: obstacles smaller than the robot.
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kTiltedBuriedPallet;
    o.length = p.width;
    o.width = p.length;
    o.height = 0.2;
    place(6, 1.5 + 0.4, o);
  }
  {
    auto o = pallet(ObstacleKind::kRotatedPallet, 1, 45 * deg);
    o.length = 0.6;
    o.width = p.width;
    place(7, 1.9, o);
  }
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kTiltedBuriedPallet;
    o.length = 0.35;
    o.width = p.length;
    o.height = 0.3;
    place(8, 1.5 + 0.175, o);
  }
  {
    auto o = pallet(ObstacleKind::kRotatedPallet, 1, -30 * deg);
    o.length = 0.4;
    o.width = p.length;
    o.height = 0.22;
    place(9, 1.9, o);
  }
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kTiltedBuriedPallet;
    o.length = 0.4;
    o.width = p.length;
    o.height = 0.3;
    o.yaw = std::numbers::pi;  // steep face first
    place(10, 1.5 + 0.2, o);
  }
  {
    auto o = pallet(ObstacleKind::kPalletStack, 1, 0.0);
    o.length = 0.3;
    o.width = p.length;
    o.height = 0.28;
    place(11, 1.5 + 0.15, o);
  }
  // 12: A-shaped ramp.
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kARamp;
    o.length = 3.0;
    o.width = 1.0;
    o.height = 0.5;
    place(12, 1.5 + 1.5, o);
  }
  // 13: U-shaped ramp.
  {
    ObstacleDesc o;
    o.kind = ObstacleKind::kURamp;
    o.length = 3.6;
    o.width = 1.0;
    o.height = 0.45;
    o.depth = 0.3;
    place(13, 1.5 + 1.8, o);
  }
  a.map_min = Eigen::Vector2d(-3.0, -2.5);
  a.map_max = Eigen::Vector2d(s + 3.0, 2.5);
  return a;
}

}  // namespace flipperbench
