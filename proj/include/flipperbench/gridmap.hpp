#pragma once

// Regular elevation grids, bilinear sampling, surface normals and block
// downsampling. Everything here is templated on the scalar type; the rest of
// the library uses the double instantiations below.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "flipperbench/error.hpp"

namespace flipperbench {

// Elevation grid. Cell (col, row) has its center at origin + resolution * (col, row);
// columns run along +x and rows along +y. Heights are stored row-major.
template <typename Scalar>
class BasicHeightMap {
 public:
  using Grid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

  BasicHeightMap() = default;

  BasicHeightMap(Scalar resolution, const Vector2& origin, Grid heights)
      : resolution_(resolution), origin_(origin), heights_(std::move(heights)) {
    if (!(resolution_ > Scalar(0)) || !std::isfinite(double(resolution_))) {
      throw ArgumentError("height map resolution must be positive");
    }
    if (heights_.rows() < 1 || heights_.cols() < 1) {
      throw ArgumentError("height map needs at least one cell");
    }
    if (!heights_.allFinite()) {
      throw ArgumentError("height map contains non-finite heights");
    }
  }

  // Constant-height map of the given size.
  static BasicHeightMap constant(Scalar resolution, const Vector2& origin, Eigen::Index cols,
                                 Eigen::Index rows, Scalar height = Scalar(0)) {
    return BasicHeightMap(resolution, origin, Grid::Constant(rows, cols, height));
  }

  Scalar resolution() const { return resolution_; }
  const Vector2& origin() const { return origin_; }
  Eigen::Index cols() const { return heights_.cols(); }
  Eigen::Index rows() const { return heights_.rows(); }
  const Grid& heights() const { return heights_; }

  Scalar at(Eigen::Index col, Eigen::Index row) const { return heights_(row, col); }

  Vector2 cell_center(Eigen::Index col, Eigen::Index row) const {
    return origin_ + resolution_ * Vector2(Scalar(col), Scalar(row));
  }

  Scalar max_x() const { return origin_.x() + resolution_ * Scalar(cols() - 1); }
  Scalar max_y() const { return origin_.y() + resolution_ * Scalar(rows() - 1); }

  // True when (x, y) lies inside the hull of cell centers.
  bool contains(Scalar x, Scalar y) const {
    const Scalar eps = resolution_ * Scalar(1e-9);
    return x >= origin_.x() - eps && x <= max_x() + eps && y >= origin_.y() - eps &&
           y <= max_y() + eps;
  }

 private:
  Scalar resolution_{1};
  Vector2 origin_{Vector2::Zero()};
  Grid heights_;
};

// Per-cell unit normals sharing the geometry of their source map.
template <typename Scalar>
class BasicNormalMap {
 public:
  using Grid = typename BasicHeightMap<Scalar>::Grid;
  using Vector2 = typename BasicHeightMap<Scalar>::Vector2;
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  BasicNormalMap() = default;
  BasicNormalMap(Scalar resolution, const Vector2& origin, Grid nx, Grid ny, Grid nz)
      : resolution_(resolution),
        origin_(origin),
        nx_(std::move(nx)),
        ny_(std::move(ny)),
        nz_(std::move(nz)) {}

  Scalar resolution() const { return resolution_; }
  const Vector2& origin() const { return origin_; }
  Eigen::Index cols() const { return nz_.cols(); }
  Eigen::Index rows() const { return nz_.rows(); }

  Vector3 at(Eigen::Index col, Eigen::Index row) const {
    return Vector3(nx_(row, col), ny_(row, col), nz_(row, col));
  }
  Vector2 cell_center(Eigen::Index col, Eigen::Index row) const {
    return origin_ + resolution_ * Vector2(Scalar(col), Scalar(row));
  }

  const Grid& nx() const { return nx_; }
  const Grid& ny() const { return ny_; }
  const Grid& nz() const { return nz_; }

 private:
  Scalar resolution_{1};
  Vector2 origin_{Vector2::Zero()};
  Grid nx_, ny_, nz_;
};

using HeightMap = BasicHeightMap<double>;
using SurfaceNormalMap = BasicNormalMap<double>;

// Bilinear interpolation of the four cells surrounding (x, y).
template <typename Scalar>
Scalar sample_height(const BasicHeightMap<Scalar>& map, Scalar x, Scalar y) {
  if (!map.contains(x, y)) {
    throw BoundsError("height query (" + std::to_string(double(x)) + ", " +
                      std::to_string(double(y)) + ") outside map");
  }
  const Scalar fx = (x - map.origin().x()) / map.resolution();
  const Scalar fy = (y - map.origin().y()) / map.resolution();
  const Eigen::Index max_c = map.cols() - 1;
  const Eigen::Index max_r = map.rows() - 1;
  Eigen::Index c0 = std::clamp<Eigen::Index>(Eigen::Index(std::floor(fx)), 0, max_c);
  Eigen::Index r0 = std::clamp<Eigen::Index>(Eigen::Index(std::floor(fy)), 0, max_r);
  const Eigen::Index c1 = std::min(c0 + 1, max_c);
  const Eigen::Index r1 = std::min(r0 + 1, max_r);
  const Scalar tx = std::clamp(fx - Scalar(c0), Scalar(0), Scalar(1));
  const Scalar ty = std::clamp(fy - Scalar(r0), Scalar(0), Scalar(1));
  const auto& h = map.heights();
  const Scalar h0 = h(r0, c0) + tx * (h(r0, c1) - h(r0, c0));
  const Scalar h1 = h(r1, c0) + tx * (h(r1, c1) - h(r1, c0));
  return h0 + ty * (h1 - h0);
}

// normalize(-dh/dx, -dh/dy, 1) with central differences inside and one-sided
// differences on the border.
template <typename Scalar>
BasicNormalMap<Scalar> compute_normals(const BasicHeightMap<Scalar>& map) {
  using Grid = typename BasicHeightMap<Scalar>::Grid;
  const Eigen::Index rows = map.rows();
  const Eigen::Index cols = map.cols();
  const auto& h = map.heights();
  const Scalar res = map.resolution();
  Grid nx(rows, cols), ny(rows, cols), nz(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      Scalar gx = 0;
      if (cols > 1) {
        const Eigen::Index lo = std::max<Eigen::Index>(c - 1, 0);
        const Eigen::Index hi = std::min<Eigen::Index>(c + 1, cols - 1);
        gx = (h(r, hi) - h(r, lo)) / (res * Scalar(hi - lo));
      }
      Scalar gy = 0;
      if (rows > 1) {
        const Eigen::Index lo = std::max<Eigen::Index>(r - 1, 0);
        const Eigen::Index hi = std::min<Eigen::Index>(r + 1, rows - 1);
        gy = (h(hi, c) - h(lo, c)) / (res * Scalar(hi - lo));
      }
      const Scalar inv = Scalar(1) / std::sqrt(gx * gx + gy * gy + Scalar(1));
      nx(r, c) = -gx * inv;
      ny(r, c) = -gy * inv;
      nz(r, c) = inv;
    }
  }
  return BasicNormalMap<Scalar>(res, map.origin(), std::move(nx), std::move(ny), std::move(nz));
}

// Block mean over factor x factor cells; border blocks average whatever cells
// they cover. The new origin sits at the center of the first full block.
template <typename Scalar>
BasicHeightMap<Scalar> downsample(const BasicHeightMap<Scalar>& map, int factor) {
  if (factor < 1) {
    throw ArgumentError("downsample factor must be a positive integer");
  }
  if (factor == 1) return map;
  using Grid = typename BasicHeightMap<Scalar>::Grid;
  const Eigen::Index f = factor;
  const Eigen::Index cols = (map.cols() + f - 1) / f;
  const Eigen::Index rows = (map.rows() + f - 1) / f;
  Grid out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index r0 = r * f, c0 = c * f;
      const Eigen::Index nr = std::min(f, map.rows() - r0);
      const Eigen::Index nc = std::min(f, map.cols() - c0);
      out(r, c) = map.heights().block(r0, c0, nr, nc).mean();
    }
  }
  const Scalar shift = map.resolution() * Scalar(f - 1) / Scalar(2);
  return BasicHeightMap<Scalar>(map.resolution() * Scalar(f),
                                map.origin() + typename BasicHeightMap<Scalar>::Vector2(shift, shift),
                                std::move(out));
}

// Writes the grid as CSV: a comment line with geometry, then one line per row
// (increasing y), values separated by commas.
void write_heightmap_csv(const HeightMap& map, std::ostream& out);

}  // namespace flipperbench
