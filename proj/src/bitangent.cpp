#include "shapereg/bitangent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace shapereg {

Line DualCurve::line_at(const Point& uv) const {
  // u (x - ox) + v (y - oy) + 1 = 0
  return Line::from_coefficients(uv.x(), uv.y(), 1.0 - uv.x() * origin.x() - uv.y() * origin.y());
}

Line DualCurve::line(std::size_t i) const { return line_at(points[i]); }

namespace {

constexpr double kDenomEps = 1e-9;

Point tangent_at(const LevelLine& line, std::size_t i) {
  const auto& p = line.points;
  const std::size_t n = p.size();
  if (line.closed) return 0.5 * (p[(i + 1) % n] - p[(i + n - 1) % n]);
  if (i == 0) return p[1] - p[0];
  if (i + 1 == n) return p[n - 1] - p[n - 2];
  return 0.5 * (p[i + 1] - p[i - 1]);
}

}  // namespace

DualCurve dual_curve(const LevelLine& line) {
  const auto& p = line.points;
  const std::size_t n = p.size();
  if (n < 3) throw Error(ErrorCode::DegenerateDual, "curve has fewer than 3 vertices");

  Point centroid = Point::Zero();
  Point lo = p[0], hi = p[0];
  for (const auto& q : p) {
    centroid += q;
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  centroid /= static_cast<double>(n);

  std::vector<Point> tangents(n);
  for (std::size_t i = 0; i < n; ++i) tangents[i] = tangent_at(line, i);

  DualCurve dual;
  dual.closed = line.closed;
  dual.origin = centroid;
  auto denom = [&](std::size_t i) {
    const Point q = p[i] - dual.origin;
    return tangents[i].x() * q.y() - tangents[i].y() * q.x();
  };
  bool near_zero = false;
  for (std::size_t i = 0; i < n && !near_zero; ++i) near_zero = std::abs(denom(i)) < kDenomEps;
  if (near_zero) {
    const double eps = 0.37 * (hi - lo).norm();
    dual.origin += Point(eps, eps);
  }

  dual.points.assign(n, Point::Zero());
  dual.valid.assign(n, 0);
  std::vector<double> dens(n);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = denom(i);
    dens[i] = d;
    if (std::abs(d) < kDenomEps || tangents[i].squaredNorm() == 0.0) continue;
    dual.points[i] = Point(tangents[i].y() / d, -tangents[i].x() / d);
    dual.valid[i] = 1;
    any = true;
  }
  if (!any) throw Error(ErrorCode::DegenerateDual, "no vertex has a finite dual point");

  const std::size_t segs = line.closed ? n : n - 1;
  dual.segment_valid.assign(segs, 0);
  for (std::size_t i = 0; i < segs; ++i) {
    const std::size_t j = (i + 1) % n;
    dual.segment_valid[i] = dual.valid[i] && dual.valid[j] && ((dens[i] > 0) == (dens[j] > 0));
  }
  return dual;
}

// ---------------------------------------------------------------------------
// Bentley-Ottmann

namespace {

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool lex_less(const Point& a, const Point& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

struct SweepSeg {
  Point a, b;  // a lexicographically first
  double slope;
};

enum EventKind { kCross = 0, kEnd = 1, kStart = 2 };

struct Event {
  double x, y;
  int kind;
  int s1, s2;
  bool operator<(const Event& o) const {
    return std::tie(x, y, kind, s1, s2) < std::tie(o.x, o.y, o.kind, o.s1, o.s2);
  }
};

class Sweep {
 public:
  explicit Sweep(std::span<const Segment2> input) {
    segs_.reserve(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
      Point a = input[i].a, b = input[i].b;
      if (lex_less(b, a)) std::swap(a, b);
      const double dx = b.x() - a.x();
      const double slope = dx != 0.0 ? (b.y() - a.y()) / dx : std::numeric_limits<double>::infinity();
      segs_.push_back({a, b, slope});
      const int id = static_cast<int>(i);
      if (a == b) continue;  // a point cannot properly cross anything
      queue_.insert({a.x(), a.y(), kStart, id, -1});
      queue_.insert({b.x(), b.y(), kEnd, id, -1});
    }
  }

  std::vector<SweepHit> run() {
    while (!queue_.empty()) {
      const Event ev = *queue_.begin();
      queue_.erase(queue_.begin());
      ex_ = ev.x;
      ey_ = ev.y;
      switch (ev.kind) {
        case kStart: on_start(ev.s1); break;
        case kEnd: on_end(ev.s1); break;
        case kCross: on_cross(ev); break;
      }
    }
    return std::move(hits_);
  }

 private:
  double y_at(int id) const {
    const auto& s = segs_[id];
    if (s.a.x() == s.b.x()) return std::clamp(ey_, s.a.y(), s.b.y());
    if (ex_ <= s.a.x()) return s.a.y();
    if (ex_ >= s.b.x()) return s.b.y();
    return s.a.y() + (ex_ - s.a.x()) / (s.b.x() - s.a.x()) * (s.b.y() - s.a.y());
  }

  // Order just to the right of the current event point.
  bool below(int p, int q) const {
    const double yp = y_at(p), yq = y_at(q);
    if (yp != yq) return yp < yq;
    if (segs_[p].slope != segs_[q].slope) return segs_[p].slope < segs_[q].slope;
    return p < q;
  }

  std::size_t position(int id) const {
    return static_cast<std::size_t>(std::find(status_.begin(), status_.end(), id) - status_.begin());
  }

  void check(std::size_t lower, std::size_t upper) {
    if (upper >= status_.size()) return;
    const int p = status_[lower], q = status_[upper];
    const auto key = std::minmax(p, q);
    if (scheduled_.count(key)) return;
    const auto &s = segs_[p], &t = segs_[q];
    const double d1 = orient(s.a, s.b, t.a), d2 = orient(s.a, s.b, t.b);
    const double d3 = orient(t.a, t.b, s.a), d4 = orient(t.a, t.b, s.b);
    const bool cross = ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
    if (!cross) return;
    scheduled_.insert(key);
    const double w = d1 / (d1 - d2);
    Point ip = t.a + w * (t.b - t.a);
    // Never schedule behind the sweep (rounding can put the point there).
    if (lex_less(ip, Point(ex_, ey_))) ip = Point(ex_, ey_);
    queue_.insert({ip.x(), ip.y(), kCross, key.first, key.second});
  }

  void on_start(int id) {
    auto it = std::partition_point(status_.begin(), status_.end(), [&](int other) { return below(other, id); });
    const std::size_t pos = static_cast<std::size_t>(it - status_.begin());
    status_.insert(it, id);
    if (pos > 0) check(pos - 1, pos);
    check(pos, pos + 1);
  }

  void on_end(int id) {
    const std::size_t pos = position(id);
    if (pos == status_.size()) return;
    status_.erase(status_.begin() + static_cast<std::ptrdiff_t>(pos));
    if (pos > 0 && pos < status_.size()) check(pos - 1, pos);
  }

  void on_cross(const Event& ev) {
    const auto &s = segs_[ev.s1], &t = segs_[ev.s2];
    const double d1 = orient(s.a, s.b, t.a), d2 = orient(s.a, s.b, t.b);
    const double w = d1 / (d1 - d2);
    hits_.push_back({t.a + w * (t.b - t.a), ev.s1, ev.s2});

    std::size_t p1 = position(ev.s1), p2 = position(ev.s2);
    if (p1 == status_.size() || p2 == status_.size()) return;
    if (p1 > p2) std::swap(p1, p2);
    if (p2 == p1 + 1) {
      std::swap(status_[p1], status_[p2]);
      if (p1 > 0) check(p1 - 1, p1);
      check(p2, p2 + 1);
      return;
    }
    // Several segments through one point, or rounding disagreement: re-sort
    // the affected block by the order just right of the event and recheck.
    std::sort(status_.begin() + static_cast<std::ptrdiff_t>(p1),
              status_.begin() + static_cast<std::ptrdiff_t>(p2) + 1,
              [&](int a, int b) { return below(a, b); });
    const std::size_t lo = p1 > 0 ? p1 - 1 : 0;
    for (std::size_t k = lo; k <= p2; ++k) check(k, k + 1);
  }

  std::vector<SweepSeg> segs_;
  std::set<Event> queue_;
  std::vector<int> status_;
  std::set<std::pair<int, int>> scheduled_;
  std::vector<SweepHit> hits_;
  double ex_ = 0.0, ey_ = 0.0;
};

}  // namespace

std::vector<SweepHit> sweep_intersections(std::span<const Segment2> segments) {
  for (const auto& s : segments) {
    if (!s.a.allFinite() || !s.b.allFinite()) throw std::invalid_argument("non-finite segment endpoint");
  }
  return Sweep(segments).run();
}

// ---------------------------------------------------------------------------
// Candidates

int covered_count(const LevelLine& line, int i1, int i2) {
  const int n = static_cast<int>(line.points.size());
  if (!line.closed) return std::abs(i2 - i1) + 1;
  return ((i2 - i1) % n + n) % n + 1;
}

Polyline covered_portion(const LevelLine& line, int i1, int i2) {
  const int n = static_cast<int>(line.points.size());
  Polyline out;
  if (!line.closed) {
    const int a = std::min(i1, i2), b = std::max(i1, i2);
    out.assign(line.points.begin() + a, line.points.begin() + b + 1);
    return out;
  }
  const int count = covered_count(line, i1, i2);
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(line.points[(i1 + k) % n]);
  return out;
}

int inflections_between(const LevelLine& line, const CurveAnnotation& ann, int i1, int i2) {
  const int n = static_cast<int>(line.points.size());
  int count = 0;
  for (int f : ann.inflections) {
    if (!line.closed) {
      if (f > std::min(i1, i2) && f < std::max(i1, i2)) ++count;
    } else {
      const int off = ((f - i1) % n + n) % n;
      if (off > 0 && off < covered_count(line, i1, i2) - 1) ++count;
    }
  }
  return count;
}

std::pair<int, int> choose_covered_arc(const LevelLine& line, int a, int b) {
  if (!line.closed) return {std::min(a, b), std::max(a, b)};
  const int n = static_cast<int>(line.points.size());
  const Point pa = line.points[a], pb = line.points[b];
  const Point d = pb - pa;
  const double len2 = d.squaredNorm();
  auto inside_fraction = [&](int from, int to) {
    const int count = covered_count(line, from, to);
    if (count <= 2 || len2 == 0.0) return 0.0;
    int inside = 0;
    for (int k = 1; k + 1 < count; ++k) {
      const double t = (line.points[(from + k) % n] - pa).dot(d) / len2;
      if (t >= 0.0 && t <= 1.0) ++inside;
    }
    return static_cast<double>(inside) / (count - 2);
  };
  const double fab = inside_fraction(a, b), fba = inside_fraction(b, a);
  if (std::abs(fab - fba) > 1e-9) return fab > fba ? std::pair{a, b} : std::pair{b, a};
  return covered_count(line, a, b) <= covered_count(line, b, a) ? std::pair{a, b} : std::pair{b, a};
}

bool chord_crosses_curve(const LevelLine& line, int i1, int i2, const Point& p1, const Point& p2) {
  const int n = static_cast<int>(line.points.size());
  const int segs = line.closed ? n : n - 1;
  auto near = [&](int k, int c) {
    int d = std::abs(k - c);
    if (line.closed) d = std::min(d, n - d);
    return d <= 2;
  };
  for (int k = 0; k < segs; ++k) {
    const int k2 = (k + 1) % n;
    if (near(k, i1) || near(k, i2) || near(k2, i1) || near(k2, i2)) continue;
    const Point &a = line.points[k], &b = line.points[k2];
    const double d1 = orient(p1, p2, a), d2 = orient(p1, p2, b);
    const double d3 = orient(a, b, p1), d4 = orient(a, b, p2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  }
  return false;
}

std::vector<Bitangent> candidate_bitangents(const LevelLine& line, const CurveAnnotation& ann,
                                            const CandidateOptions& opts) {
  const DualCurve dual = dual_curve(line);
  const int n = static_cast<int>(line.points.size());
  std::vector<Segment2> segments;
  std::vector<int> source;
  for (std::size_t i = 0; i < dual.segment_valid.size(); ++i) {
    if (!dual.segment_valid[i]) continue;
    segments.push_back({dual.points[i], dual.points[(i + 1) % n]});
    source.push_back(static_cast<int>(i));
  }
  const auto hits = sweep_intersections(segments);

  std::vector<Bitangent> out;
  for (const auto& hit : hits) {
    const int sa = source[hit.first], sb = source[hit.second];
    int sep = std::abs(sa - sb);
    if (line.closed) sep = std::min(sep, n - sep);
    if (sep < opts.min_separation) continue;

    auto nearest_vertex = [&](int s, const Point& uv) {
      const Point a = dual.points[s], b = dual.points[(s + 1) % n];
      const double len2 = (b - a).squaredNorm();
      const double t = len2 > 0.0 ? (uv - a).dot(b - a) / len2 : 0.0;
      return t < 0.5 ? s : (s + 1) % n;
    };
    const int va = nearest_vertex(sa, hit.point), vb = nearest_vertex(sb, hit.point);
    if (va == vb) continue;

    Bitangent bt;
    bt.line = dual.line_at(hit.point);
    const auto [i1, i2] = choose_covered_arc(line, va, vb);
    bt.i1 = i1;
    bt.i2 = i2;
    bt.p1 = line.points[i1];
    bt.p2 = line.points[i2];
    bt.residual = std::max(bt.line.distance(bt.p1), bt.line.distance(bt.p2));
    if (!(bt.residual < opts.contact_tolerance)) continue;
    bt.inflection_length = inflections_between(line, ann, i1, i2);
    bt.crosses_curve = chord_crosses_curve(line, i1, i2, bt.p1, bt.p2);
    out.push_back(bt);
  }
  return out;
}

}  // namespace shapereg
