#include "shapereg/frames.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace shapereg {

namespace {

int wrap_index(const LevelLine& line, int i) {
  const int n = static_cast<int>(line.points.size());
  return line.closed ? ((i % n) + n) % n : std::clamp(i, 0, n - 1);
}

int nearest_vertex_around(const LevelLine& line, int hint, const Point& p, int radius) {
  int best = wrap_index(line, hint);
  double bd = (line.points[best] - p).squaredNorm();
  for (int k = -radius; k <= radius; ++k) {
    const int i = wrap_index(line, hint + k);
    const double d = (line.points[i] - p).squaredNorm();
    if (d < bd) bd = d, best = i;
  }
  return best;
}

// Sign of p relative to the directed line a -> b, zero within tolerance.
int side(const Point& a, const Point& b, const Point& p) {
  const double c = cross(b - a, p - a);
  const double tol = 1e-12 * (b - a).squaredNorm() + 1e-300;
  return c > tol ? 1 : (c < -tol ? -1 : 0);
}

}  // namespace

bool supports(const LevelLine& line, int i, int j, int reach) {
  const int n = static_cast<int>(line.points.size());
  const Point& a = line.points[i];
  const Point& b = line.points[j];
  int sign = 0;
  for (int c : {i, j})
    for (int k = 1; k <= reach; ++k)
      for (int v : {c - k, c + k}) {
        if (!line.closed && (v < 0 || v >= n)) continue;
        const int w = wrap_index(line, v);
        if (w == i || w == j) continue;
        const int s = side(a, b, line.points[w]);
        if (s == 0 || (sign != 0 && s != sign)) return false;
        sign = s;
      }
  return sign != 0;
}

Bitangent snap_contacts(const LevelLine& line, const Bitangent& bt, int radius, int reach) {
  const int n = static_cast<int>(line.points.size());
  const int h1 = nearest_vertex_around(line, bt.i1, bt.p1, radius);
  const int h2 = nearest_vertex_around(line, bt.i2, bt.p2, radius);
  Bitangent best = bt;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int d1 = -radius; d1 <= radius; ++d1)
    for (int d2 = -radius; d2 <= radius; ++d2) {
      int i = h1 + d1, j = h2 + d2;
      if (line.closed) {
        i = wrap_index(line, i), j = wrap_index(line, j);
      } else if (i < 0 || j >= n || i >= j) {
        continue;
      }
      if (i == j || !supports(line, i, j, reach)) continue;
      const double cost = (line.points[i] - bt.p1).norm() + (line.points[j] - bt.p2).norm();
      if (cost < best_cost) {
        best_cost = cost;
        best.i1 = i, best.i2 = j;
      }
    }
  if (!std::isfinite(best_cost)) return bt;
  best.p1 = line.points[best.i1];
  best.p2 = line.points[best.i2];
  best.line = Line::through(best.p1, best.p2);
  best.residual = 0.0;
  return best;
}

Polyline frame_portion(const LevelLine& line, const Bitangent& bt) {
  Polyline out = covered_portion(line, bt.i1, bt.i2);
  if (out.size() < 2) throw Error(ErrorCode::NoFrame, "covered portion is too short");
  out.front() = bt.p1;
  out.back() = bt.p2;
  return out;
}

CastCandidates cast_points(std::span<const Point> portion, int end_margin, int reach) {
  const int m = static_cast<int>(portion.size());
  CastCandidates out;
  const Point b1 = portion.front(), b2 = portion.back();
  auto tangent_from = [&](const Point& b, int k) {
    int sign = 0;
    for (int j = 1; j <= reach; ++j)
      for (int v : {k - j, k + j}) {
        if (v < 0 || v >= m) continue;
        const int s = side(b, portion[k], portion[v]);
        if (s == 0 || (sign != 0 && s != sign)) return false;
        sign = s;
      }
    return sign != 0;
  };
  for (int k = 1 + end_margin; k <= m - 2 - end_margin; ++k) {
    if (tangent_from(b1, k)) out.c1.push_back({portion[k], static_cast<double>(k)});
    if (tangent_from(b2, k)) out.c2.push_back({portion[k], static_cast<double>(k)});
  }
  if (out.c1.empty() || out.c2.empty()) throw Error(ErrorCode::NoFrame, "no cast point for a contact");
  return out;
}

double frame_quality(const Point& b1, const Point& c1, const Point& c2, const Point& b2) {
  const Point base = b2 - b1;
  const Point t1 = c1 - b1, t2 = c2 - b2;
  const double s1 = std::abs(cross(base, t1)) / (base.norm() * t1.norm());
  const double s2 = std::abs(cross(base, t2)) / (base.norm() * t2.norm());
  return s1 * s2 * (c1 - c2).norm() / base.norm();
}

bool convex_frame(const Point& b1, const Point& c1, const Point& c2, const Point& b2) {
  const std::array<Point, 4> q{b1, c1, c2, b2};
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) scale = std::max(scale, (q[(i + 1) % 4] - q[i]).norm());
  if (!(scale > 0.0)) return false;
  const double tol = 1e-9 * scale * scale;
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const double t = cross(q[(i + 1) % 4] - q[i], q[(i + 2) % 4] - q[(i + 1) % 4]);
    if (std::abs(t) <= tol) return false;
    const int s = t > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

std::vector<Frame> build_frames(const Point& b1, const Point& b2, const CastCandidates& cands,
                                const FrameOptions& opts) {
  std::vector<Frame> out;
  for (const auto& c1 : cands.c1)
    for (const auto& c2 : cands.c2) {
      if (!convex_frame(b1, c1.point, c2.point, b2)) continue;
      out.push_back({b1, c1.point, c2.point, b2, frame_quality(b1, c1.point, c2.point, b2), c1.position,
                     c2.position});
    }
  if (out.empty()) throw Error(ErrorCode::NoFrame, "no convex frame");
  std::stable_sort(out.begin(), out.end(), [](const Frame& x, const Frame& y) { return x.quality > y.quality; });
  if (static_cast<int>(out.size()) > opts.max_frames) out.resize(opts.max_frames);
  return out;
}

namespace {

Eigen::Matrix3d hartley(std::span<const Point> pts) {
  Point mean = Point::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  if (!(dist > 0.0)) throw Error(ErrorCode::DegenerateFrame, "coincident points");
  const double s = std::sqrt(2.0) / dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

bool has_collinear_triple(std::span<const Point> p) {
  double scale = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) scale = std::max(scale, (p[i] - p[j]).norm());
  const double tol = 1e-9 * scale * scale;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      for (std::size_t k = j + 1; k < p.size(); ++k)
        if (std::abs(cross(p[j] - p[i], p[k] - p[i])) <= tol) return true;
  return false;
}

}  // namespace

Homography homography_dlt(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != 4 || dst.size() != 4) throw std::invalid_argument("homography_dlt needs 4 correspondences");
  if (has_collinear_triple(src) || has_collinear_triple(dst)) {
    throw Error(ErrorCode::DegenerateFrame, "three collinear frame points");
  }
  const Eigen::Matrix3d ts = hartley(src), td = hartley(dst);
  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d x = ts * src[i].homogeneous();
    const Eigen::Vector3d u = td * dst[i].homogeneous();
    a.row(2 * i) << -x(0), -x(1), -1, 0, 0, 0, u(0) * x(0), u(0) * x(1), u(0);
    a.row(2 * i + 1) << 0, 0, 0, -x(0), -x(1), -1, u(1) * x(0), u(1) * x(1), u(1);
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Homography out = td.inverse() * hn * ts;
  if (std::abs(out(2, 2)) > 1e-12 * out.norm()) out /= out(2, 2);
  else out /= out.norm();
  if (!(std::abs(out.determinant()) > 1e-12)) throw Error(ErrorCode::DegenerateFrame, "singular homography");
  return out;
}

Point apply(const Homography& h, const Point& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  return q.hnormalized();
}

std::array<Point, 4> unit_square() { return {Point(0, 0), Point(0, 1), Point(1, 1), Point(1, 0)}; }

std::vector<Point> resample_count(std::span<const Point> points, int count) {
  if (points.empty() || count < 2) throw Error(ErrorCode::EmptyCurve, "nothing to resample");
  std::vector<double> cum(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) cum[i] = cum[i - 1] + (points[i] - points[i - 1]).norm();
  const double total = cum.back();
  std::vector<Point> out;
  out.reserve(count);
  out.push_back(points.front());
  std::size_t seg = 1;
  for (int k = 1; k + 1 < count; ++k) {
    const double target = total * k / (count - 1);
    while (seg + 1 < points.size() && cum[seg] < target) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double f = len > 0 ? (target - cum[seg - 1]) / len : 0.0;
    out.push_back(points[seg - 1] + f * (points[seg] - points[seg - 1]));
  }
  out.push_back(points.back());
  return out;
}

CanonicalCurve canonical_curve(std::span<const Point> portion, const Frame& frame, int count) {
  const auto src = frame.corners();
  const auto dst = unit_square();
  const Homography h = homography_dlt(src, dst);
  std::vector<Point> mapped;
  mapped.reserve(portion.size());
  int sign = 0;
  for (const auto& p : portion) {
    const Eigen::Vector3d q = h * p.homogeneous();
    const double scale = std::abs(h(2, 0) * p.x()) + std::abs(h(2, 1) * p.y()) + std::abs(h(2, 2));
    if (std::abs(q(2)) < 1e-9 * scale) throw Error(ErrorCode::NearInfinityPoint, "portion meets the vanishing line");
    const int s = q(2) > 0 ? 1 : -1;
    if (sign != 0 && s != sign) throw Error(ErrorCode::NearInfinityPoint, "portion crosses the vanishing line");
    sign = s;
    mapped.push_back(q.hnormalized());
  }
  CanonicalCurve out;
  out.points = resample_count(mapped, count);
  return out;
}

}  // namespace shapereg
