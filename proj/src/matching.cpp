#include "shapereg/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Dense>

namespace shapereg {

std::array<double, 6> AffineTransform::row_major() const {
  return {linear(0, 0), linear(0, 1), translation(0), linear(1, 0), linear(1, 1), translation(1)};
}

namespace {

// Exact discrete Frechet distance, or any value > bound once every cell of
// a row exceeds it (the distance can only grow from there).
double frechet_bounded(std::span<const Point> p, std::span<const Point> q, double bound) {
  if (p.empty() || q.empty()) throw Error(ErrorCode::EmptyCurve, "discrete Frechet of an empty curve");
  const std::size_t m = q.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double row_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const double d = (p[i] - q[j]).norm();
      double reach;
      if (i == 0 && j == 0) reach = d;
      else if (i == 0) reach = std::max(cur[j - 1], d);
      else if (j == 0) reach = std::max(prev[0], d);
      else reach = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      cur[j] = reach;
      row_min = std::min(row_min, reach);
    }
    if (row_min > bound) return row_min;
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

}  // namespace

double discrete_frechet(std::span<const Point> p, std::span<const Point> q) {
  return frechet_bounded(p, q, std::numeric_limits<double>::infinity());
}

FreeSpace free_space_reachable(std::span<const Point> p, std::span<const Point> q, double delta) {
  if (p.empty() || q.empty()) throw Error(ErrorCode::EmptyCurve, "free space of an empty curve");
  FreeSpace fs;
  fs.rows = static_cast<int>(p.size());
  fs.cols = static_cast<int>(q.size());
  fs.reachable.assign(p.size() * q.size(), 0);
  auto cell = [&](int i, int j) -> std::uint8_t& { return fs.reachable[static_cast<std::size_t>(i) * fs.cols + j]; };
  for (int i = 0; i < fs.rows; ++i)
    for (int j = 0; j < fs.cols; ++j) {
      if (!((p[i] - q[j]).norm() <= delta)) continue;
      const bool from = (i == 0 && j == 0) || (i > 0 && cell(i - 1, j)) || (j > 0 && cell(i, j - 1)) ||
                        (i > 0 && j > 0 && cell(i - 1, j - 1));
      cell(i, j) = from ? 1 : 0;
    }
  if (fs.top_right()) {
    int i = fs.rows - 1, j = fs.cols - 1;
    fs.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
      if (i > 0 && j > 0 && cell(i - 1, j - 1)) --i, --j;
      else if (i > 0 && cell(i - 1, j)) --i;
      else --j;
      fs.path.emplace_back(i, j);
    }
    std::reverse(fs.path.begin(), fs.path.end());
  }
  return fs;
}

std::vector<Point> reversed_canonical(std::span<const Point> canonical) {
  std::vector<Point> out(canonical.rbegin(), canonical.rend());
  for (auto& p : out) p.x() = 1.0 - p.x();
  return out;
}

std::vector<Match> match_elements(std::span<const ShapeElement> part, std::span<const ShapeElement> whole,
                                  const MatchOptions& opts) {
  std::vector<Match> out;
  for (int pi = 0; pi < static_cast<int>(part.size()); ++pi) {
    const auto& fwd = part[pi].canonical.points;
    const auto rev = reversed_canonical(fwd);
    std::map<int, Match> best;  // per whole level line
    for (int wi = 0; wi < static_cast<int>(whole.size()); ++wi) {
      const auto& w = whole[wi];
      if (std::abs(w.inflection_length - part[pi].inflection_length) > opts.band_slack) continue;
      auto it = best.find(w.line);
      const double bound = it == best.end() ? opts.threshold : std::min(opts.threshold, it->second.distance);
      const double df = frechet_bounded(fwd, w.canonical.points, bound);
      const double dr = frechet_bounded(rev, w.canonical.points, std::min(bound, df));
      const bool flipped = dr < df;
      const double d = flipped ? dr : df;
      if (!(d <= opts.threshold)) continue;
      if (it == best.end()) best.emplace(w.line, Match{pi, wi, d, flipped});
      else if (d < it->second.distance) it->second = Match{pi, wi, d, flipped};
    }
    std::vector<Match> row;
    for (const auto& [line, m] : best) row.push_back(m);
    std::sort(row.begin(), row.end(), [](const Match& a, const Match& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.whole < b.whole;
    });
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::optional<InflectionBand> effective_band(std::span<const ShapeElement> part, const InflectionBand& band) {
  int longest = 0;
  bool in_band = false;
  for (const auto& e : part) {
    if (e.inflection_length >= band.min_len && e.inflection_length <= band.max_len) in_band = true;
    if (e.inflection_length <= band.max_len) longest = std::max(longest, e.inflection_length);
  }
  if (in_band) return band;
  if (longest >= 3) return InflectionBand{longest, band.max_len};
  return std::nullopt;
}

std::vector<ShapeElement> filter_band(std::span<const ShapeElement> elements, const InflectionBand& band) {
  std::vector<ShapeElement> out;
  for (const auto& e : elements)
    if (e.inflection_length >= band.min_len && e.inflection_length <= band.max_len) out.push_back(e);
  return out;
}

AffineTransform affine_from_correspondences(std::span<const Point> src, std::span<const Point> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw Error(ErrorCode::DegenerateCorrespondences, "need at least three correspondences");
  }
  const int n = static_cast<int>(src.size());
  Point mean = Point::Zero();
  for (const auto& p : src) mean += p;
  mean /= n;
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : src) scatter += (p - mean) * (p - mean).transpose();
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(scatter).eigenvalues();
  if (!(ev(1) > 0.0) || ev(0) <= 1e-12 * ev(1)) {
    throw Error(ErrorCode::DegenerateCorrespondences, "collinear source points");
  }
  // Centred design keeps the normal equations well conditioned.
  Eigen::MatrixXd a(n, 3);
  Eigen::MatrixXd b(n, 2);
  for (int i = 0; i < n; ++i) {
    a.row(i) << src[i].x() - mean.x(), src[i].y() - mean.y(), 1.0;
    b.row(i) << dst[i].x(), dst[i].y();
  }
  const Eigen::MatrixXd x = a.colPivHouseholderQr().solve(b);  // 3 x 2
  AffineTransform t;
  t.linear << x(0, 0), x(1, 0), x(0, 1), x(1, 1);
  t.translation = Eigen::Vector2d(x(2, 0), x(2, 1)) - t.linear * mean;
  if (!(std::abs(t.linear.determinant()) > 1e-9)) {
    throw Error(ErrorCode::DegenerateCorrespondences, "singular linear part");
  }
  return t;
}

void match_correspondences(const ShapeElement& part, const ShapeElement& whole, bool flipped,
                           std::array<Point, 3>& src, std::array<Point, 3>& dst) {
  const Frame& f = part.frame;
  const Frame& g = whole.frame;
  const Point base = f.b2 - f.b1;
  const double s1 = std::abs(cross(base, f.c1 - f.b1)) / ((f.c1 - f.b1).norm() * base.norm());
  const double s2 = std::abs(cross(base, f.c2 - f.b2)) / ((f.c2 - f.b2).norm() * base.norm());
  const bool first = s1 >= s2;
  src = {f.b1, f.b2, first ? f.c1 : f.c2};
  if (!flipped) dst = {g.b1, g.b2, first ? g.c1 : g.c2};
  else dst = {g.b2, g.b1, first ? g.c2 : g.c1};
}

RansacResult ransac_affine(std::span<const Triple> triples, const RansacOptions& opts) {
  const int n = static_cast<int>(triples.size());
  if (n == 0) throw Error(ErrorCode::ConsensusFailed, "no matches");
  // Content order: the schedule does not depend on the input order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    std::array<double, 12> k;
    for (int j = 0; j < 3; ++j) {
      k[4 * j] = triples[i].src[j].x(), k[4 * j + 1] = triples[i].src[j].y();
      k[4 * j + 2] = triples[i].dst[j].x(), k[4 * j + 3] = triples[i].dst[j].y();
    }
    return k;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  const double tol2 = opts.inlier_tol_px * opts.inlier_tol_px;
  const double r2 = opts.distinct_radius_px * opts.distinct_radius_px;
  std::vector<Point> centroid(n);
  for (int i = 0; i < n; ++i) centroid[i] = (triples[i].src[0] + triples[i].src[1] + triples[i].src[2]) / 3.0;
  struct Consensus {
    std::vector<int> inliers;
    int support = 0;
    double cost = std::numeric_limits<double>::infinity();
    bool beats(const Consensus& o) const {
      if (support != o.support) return support > o.support;
      if (inliers.size() != o.inliers.size()) return inliers.size() > o.inliers.size();
      return cost < o.cost;
    }
  };
  auto consensus = [&](const AffineTransform& t) {
    Consensus c;
    c.cost = 0.0;
    std::vector<Point> counted;
    for (int i : order) {
      double worst = 0.0;
      for (int j = 0; j < 3; ++j) worst = std::max(worst, (t(triples[i].src[j]) - triples[i].dst[j]).squaredNorm());
      if (worst > tol2) continue;
      c.inliers.push_back(i);
      c.cost += worst;
      const bool distinct = std::none_of(counted.begin(), counted.end(),
                                         [&](const Point& q) { return (q - centroid[i]).squaredNorm() <= r2; });
      if (r2 == 0.0 || distinct) counted.push_back(centroid[i]);
    }
    c.support = static_cast<int>(counted.size());
    std::sort(c.inliers.begin(), c.inliers.end());
    return c;
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  Consensus best;
  for (int it = 0; it < opts.iterations; ++it) {
    const Triple& s = triples[order[pick(rng)]];
    AffineTransform t;
    try {
      t = affine_from_correspondences(s.src, s.dst);
    } catch (const Error&) {
      continue;
    }
    auto c = consensus(t);
    if (c.beats(best)) best = std::move(c);
  }
  if (best.support < opts.min_inliers) {
    throw Error(ErrorCode::ConsensusFailed, "best consensus has " + std::to_string(best.support) +
                                                " distinct matches, need " + std::to_string(opts.min_inliers));
  }
  std::vector<Point> src, dst;
  for (int i : best.inliers)
    for (int j = 0; j < 3; ++j) src.push_back(triples[i].src[j]), dst.push_back(triples[i].dst[j]);
  return {affine_from_correspondences(src, dst), best.inliers, best.support};
}

RansacResult ransac_affine(std::span<const Match> matches, std::span<const ShapeElement> part,
                           std::span<const ShapeElement> whole, const RansacOptions& opts) {
  std::vector<Triple> triples(matches.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const Match& m = matches[i];
    match_correspondences(part[m.part], whole[m.whole], m.flipped, triples[i].src, triples[i].dst);
  }
  return ransac_affine(triples, opts);
}

}  // namespace shapereg
