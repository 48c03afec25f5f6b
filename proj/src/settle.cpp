#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

#include "flipperbench/error.hpp"
#include "flipperbench/sim.hpp"

namespace flipperbench {

namespace {

// Whether the origin lies inside the convex hull of pts (boundary counts).
bool hull_contains_origin(std::vector<Eigen::Vector2d> pts) {
  if (pts.size() < 3) return false;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  // Andrew's monotone chain, counter-clockwise.
  std::vector<Eigen::Vector2d> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() < 3) return false;
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (cross(h[i], h[(i + 1) % h.size()], o) < -1e-12) return false;
  }
  return true;
}

// Linearized support problem around the current orientation:
//
//   min z  s.t.  z + a_i dp + b_i dr >= c_i   (every sample stays above terrain)
//                |dp| <= box, |dr| <= box     (trust region)
//
// solved through its dual, max c'l - box*sum(m) s.t. sum(l) = 1 and the two
// moment rows vanish. A basis holds three columns; contact columns in the
// optimal basis are the support set and their weights the load shares.
struct SupportLp {
  double z = 0, dp = 0, dr = 0;
  std::array<int, 3> support{-1, -1, -1};
};

SupportLp solve_support_lp(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, double box) {
  const int n = int(c.size());
  // Columns 0..n-1 are contacts; n..n+3 are the trust-region bounds.
  auto column = [&](int j) -> Eigen::Vector3d {
    if (j < n) return {1.0, a[j], b[j]};
    switch (j - n) {
      case 0: return {0, -1, 0};
      case 1: return {0, 1, 0};
      case 2: return {0, 0, -1};
      default: return {0, 0, 1};
    }
  };
  auto cost = [&](int j) { return j < n ? c[j] : -box; };

  int k = 0;
  c.maxCoeff(&k);
  std::array<int, 3> basis{k, a[k] >= 0 ? n : n + 1, b[k] >= 0 ? n + 2 : n + 3};

  const int total = n + 4;
  Eigen::Matrix3d B;
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  for (int iter = 0; iter < 10 * total + 50; ++iter) {
    for (int i = 0; i < 3; ++i) B.col(i) = column(basis[i]);
    const Eigen::Matrix3d Binv = B.inverse();
    const Eigen::Vector3d cb(cost(basis[0]), cost(basis[1]), cost(basis[2]));
    y = Binv.transpose() * cb;
    const Eigen::Vector3d xb = Binv.col(0);

    // Dantzig pricing, Bland's rule once the iteration count suggests cycling.
    const bool bland = iter > 2 * total;
    int enter = -1;
    double best = 1e-12;
    for (int j = 0; j < total; ++j) {
      if (j == basis[0] || j == basis[1] || j == basis[2]) continue;
      const double rc = cost(j) - y.dot(column(j));
      if (rc > best) {
        enter = j;
        if (bland) break;
        best = rc;
      }
    }
    if (enter < 0) break;

    const Eigen::Vector3d dir = Binv * column(enter);
    int leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      if (dir[i] > 1e-12) {
        const double r = std::max(xb[i], 0.0) / dir[i];
        if (r < ratio - 1e-15 || (bland && r <= ratio + 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
          ratio = r;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur with the box; keep current basis
    basis[leave] = enter;
  }

  SupportLp out;
  out.z = y[0];
  out.dp = std::clamp(y[1], -box, box);
  out.dr = std::clamp(y[2], -box, box);
  int m = 0;
  for (int j : basis) {
    if (j < n) out.support[m++] = j;
  }
  return out;
}

struct Evaluated {
  double z = 0;                 // lifted origin height
  Eigen::VectorXd terrain;      // terrain under each sample
  Eigen::VectorXd offset;       // sample z relative to the origin
};

Evaluated evaluate(const HeightMap& map, double x, double y, const Eigen::Matrix3d& R,
                   const std::vector<BodySample>& samples) {
  Evaluated e;
  const auto n = Eigen::Index(samples.size());
  e.terrain.resize(n);
  e.offset.resize(n);
  e.z = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d w = R * samples[std::size_t(i)].point;
    e.offset[i] = w.z();
    e.terrain[i] = sample_height(map, x + w.x(), y + w.y());
    e.z = std::max(e.z, e.terrain[i] - e.offset[i]);
  }
  return e;
}

}  // namespace

double resting_height(const HeightMap& map, double x, double y, double yaw, double pitch,
                      double roll, const FlipperAngles& theta, const RobotGeometry& geometry) {
  const auto samples = body_samples(geometry, theta);
  return evaluate(map, x, y, body_rotation(yaw, pitch, roll), samples).z;
}

SettleResult settle_pose(const HeightMap& map, double x, double y, double yaw,
                         const FlipperAngles& theta, const RobotGeometry& geometry,
                         const SettleOptions& options) {
  const auto samples = body_samples(geometry, theta);
  const auto n = Eigen::Index(samples.size());

  double pitch = 0, roll = 0;
  if (options.initial_pitch_roll) {
    pitch = (*options.initial_pitch_roll)[0];
    roll = (*options.initial_pitch_roll)[1];
  }
  Evaluated cur = evaluate(map, x, y, body_rotation(yaw, pitch, roll), samples);

  double box = 0.2;
  bool converged = false;
  int iter = 0;
  std::array<int, 3> support{-1, -1, -1};
  Eigen::VectorXd a(n), b(n), c(n);
  for (; iter < options.max_iterations; ++iter) {
    // Derivatives of each sample's world z with respect to pitch and roll.
    const double sp = std::sin(pitch), cp = std::cos(pitch);
    const double sr = std::sin(roll), cr = std::cos(roll);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d& p = samples[std::size_t(i)].point;
      const double lateral = sr * p.y() + cr * p.z();
      a[i] = -cp * p.x() - sp * lateral;
      b[i] = cp * (cr * p.y() - sr * p.z());
      c[i] = cur.terrain[i] - cur.offset[i];
    }
    const SupportLp lp = solve_support_lp(a, b, c, box);
    support = lp.support;
    const double predicted = cur.z - lp.z;
    if (predicted < 1e-7 || (std::abs(lp.dp) < 1e-9 && std::abs(lp.dr) < 1e-9)) {
      converged = true;
      break;
    }
    const double np = pitch + lp.dp, nr = roll + lp.dr;
    Evaluated next = evaluate(map, x, y, body_rotation(yaw, np, nr), samples);
    const double actual = cur.z - next.z;
    if (actual > 0) {
      pitch = np;
      roll = nr;
      cur = std::move(next);
      if (actual > 0.75 * predicted) box = std::min(2 * box, 0.5);
      if (actual < 1e-7) {
        converged = true;
        ++iter;
        break;
      }
    } else {
      box *= 0.25;
      if (box < 1e-7) {
        converged = true;
        break;
      }
    }
  }

  if (!std::isfinite(cur.z) || !std::isfinite(pitch) || !std::isfinite(roll)) {
    throw SettleError("settle produced a non-finite pose");
  }
  SettleResult out;
  out.z = cur.z;
  out.pitch = pitch;
  out.roll = roll;
  out.iterations = iter;

  auto& rep = out.contacts;
  rep.in_contact.assign(samples.size(), false);
  rep.support = support;
  double max_pen = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gap = cur.z + cur.offset[i] - cur.terrain[i];
    max_pen = std::max(max_pen, -gap);
    const auto& s = samples[std::size_t(i)];
    if (s.kind != SampleKind::kBelly) ++rep.track_total;
    if (gap > options.contact_tolerance) continue;
    rep.in_contact[std::size_t(i)] = true;
    switch (s.kind) {
      case SampleKind::kBelly: ++rep.belly_contacts; break;
      case SampleKind::kTrack:
        ++rep.track_contacts;
        ++rep.main_track_contacts[std::size_t(s.element)];
        break;
      case SampleKind::kFlipper:
        ++rep.track_contacts;
        ++rep.flipper_contacts[std::size_t(s.element)];
        break;
    }
  }
  out.max_penetration = max_pen;
  if (rep.belly_contacts > 0) {
    // The belly only carries weight when the tracks and flippers touching the
    // ground cannot hold the center of mass up by themselves.
    const Eigen::Matrix3d R = body_rotation(yaw, pitch, roll);
    std::vector<Eigen::Vector2d> feet;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (rep.in_contact[i] && samples[i].kind != SampleKind::kBelly) {
        feet.push_back((R * samples[i].point).head<2>());
      }
    }
    rep.belly_loaded = !hull_contains_origin(std::move(feet));
  }
  // The lifted height rests on the terrain by construction; an unconverged
  // descent is only an error while it still predicts a drop larger than the
  // penetration tolerance.
  if (!converged) {
    const double sp = std::sin(pitch), cp = std::cos(pitch);
    const double sr = std::sin(roll), cr = std::cos(roll);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector3d& p = samples[std::size_t(i)].point;
      const double lateral = sr * p.y() + cr * p.z();
      a[i] = -cp * p.x() - sp * lateral;
      b[i] = cp * (cr * p.y() - sr * p.z());
      c[i] = cur.terrain[i] - cur.offset[i];
    }
    const SupportLp lp = solve_support_lp(a, b, c, std::max(box, 1e-3));
    if (cur.z - lp.z > options.penetration_tolerance) {
      throw SettleError("settle did not converge within " +
                        std::to_string(options.max_iterations) + " iterations");
    }
  }
  if (max_pen > options.penetration_tolerance) {
    throw SettleError("settled pose penetrates terrain");
  }
  return out;
}

}  // namespace flipperbench
