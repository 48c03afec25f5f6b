#include "flipperbench/gridmap.hpp"

#include <charconv>

namespace flipperbench {

namespace {

void put_number(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_heightmap_csv(const HeightMap& map, std::ostream& out) {
  out << "# resolution=";
  put_number(out, map.resolution());
  out << " origin_x=";
  put_number(out, map.origin().x());
  out << " origin_y=";
  put_number(out, map.origin().y());
  out << " cols=" << map.cols() << " rows=" << map.rows() << '\n';
  for (Eigen::Index r = 0; r < map.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.cols(); ++c) {
      if (c) out << ',';
      put_number(out, map.at(c, r));
    }
    out << '\n';
  }
}

}  // namespace flipperbench
