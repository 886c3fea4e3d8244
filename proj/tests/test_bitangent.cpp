#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "shapereg/bitangent.hpp"
#include "support/oracles.hpp"

using namespace shapereg;

namespace {

LevelLine graph_line(const std::function<double(double)>& f, double x0, double x1, double scale) {
  LevelLine l;
  l.points = oracle::sample_graph(f, x0, x1, 6000, scale);
  return resample_uniform(l, kDefaultSpacing);
}

LevelLine ellipse_line(double a, double b, double rot) {
  LevelLine l;
  l.closed = true;
  for (int i = 0; i < 3000; ++i) {
    const double t = 2 * std::numbers::pi * i / 3000;
    const Point q(a * std::cos(t), b * std::sin(t));
    l.points.emplace_back(100 + std::cos(rot) * q.x() - std::sin(rot) * q.y(),
                          80 + std::sin(rot) * q.x() + std::cos(rot) * q.y());
  }
  return resample_uniform(l, kDefaultSpacing);
}

int dual_self_crossings(const LevelLine& l, int min_sep = 3) {
  const DualCurve d = dual_curve(l);
  const int n = static_cast<int>(l.points.size());
  int count = 0;
  const int segs = static_cast<int>(d.segment_valid.size());
  for (int i = 0; i < segs; ++i)
    for (int j = i + 1; j < segs; ++j) {
      if (!d.segment_valid[i] || !d.segment_valid[j]) continue;
      int sep = j - i;
      if (l.closed) sep = std::min(sep, n - sep);
      if (sep < min_sep) continue;
      if (oracle::segments_cross(d.points[i], d.points[(i + 1) % n], d.points[j], d.points[(j + 1) % n])) ++count;
    }
  return count;
}

auto xsinx = [](double x) { return x * std::sin(x); };
auto quartic = [](double x) { return x * x * x * x - x * x; };

}  // namespace

TEST(Sweep, TwoCrossingSegments) {
  const std::vector<Segment2> s{{{0, 0}, {2, 2}}, {{0, 2}, {2, 0}}};
  const auto hits = sweep_intersections(s);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_NEAR(hits[0].point.x(), 1.0, 1e-12);
  EXPECT_NEAR(hits[0].point.y(), 1.0, 1e-12);
  EXPECT_EQ(hits[0].first, 0);
  EXPECT_EQ(hits[0].second, 1);
}

TEST(Sweep, ParallelSegmentsDoNotIntersect) {
  const std::vector<Segment2> s{{{0, 0}, {5, 1}}, {{0, 1}, {5, 2}}, {{0, 2}, {5, 3}}};
  EXPECT_TRUE(sweep_intersections(s).empty());
}

TEST(Sweep, TouchingAndOverlapsAreNotCrossings) {
  const std::vector<Segment2> s{{{0, 0}, {1, 1}}, {{1, 1}, {2, 0}},   // shared endpoint
                                {{3, 0}, {5, 0}}, {{4, 0}, {6, 0}},   // collinear overlap
                                {{7, 0}, {9, 0}}, {{8, 0}, {8, 3}}};  // T junction
  EXPECT_TRUE(sweep_intersections(s).empty());
}

TEST(Sweep, VerticalAndConcurrentSegments) {
  const std::vector<Segment2> s{{{1, -1}, {1, 1}}, {{0, 0}, {2, 0}}, {{0, -1}, {2, 1}}, {{0, 1}, {2, -1}}};
  const auto hits = sweep_intersections(s);
  std::set<std::pair<int, int>> pairs;
  for (const auto& h : hits) {
    pairs.insert({h.first, h.second});
    EXPECT_NEAR(h.point.x(), 1.0, 1e-12);
    EXPECT_NEAR(h.point.y(), 0.0, 1e-12);
  }
  EXPECT_EQ(pairs.size(), 6u);
  EXPECT_EQ(hits.size(), 6u);
}

TEST(Sweep, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int inst = 0; inst < 100; ++inst) {
    std::vector<Segment2> segs(200);
    for (auto& s : segs) {
      s.a = Point(U(rng), U(rng));
      s.b = s.a + 0.25 * Point(U(rng) - 0.5, U(rng) - 0.5);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto hits = sweep_intersections(segs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 1.0);

    std::map<std::pair<int, int>, Point> want;
    for (int i = 0; i < 200; ++i)
      for (int j = i + 1; j < 200; ++j)
        if (oracle::segments_cross(segs[i].a, segs[i].b, segs[j].a, segs[j].b)) {
          // Cramer's rule on p + t r = q + u s.
          const Point r = segs[i].b - segs[i].a, s = segs[j].b - segs[j].a;
          const double t = cross(segs[j].a - segs[i].a, s) / cross(r, s);
          want[{i, j}] = segs[i].a + t * r;
        }
    std::map<std::pair<int, int>, Point> got;
    for (const auto& h : hits) got[{h.first, h.second}] = h.point;
    ASSERT_EQ(hits.size(), got.size()) << "duplicate reports in instance " << inst;
    ASSERT_EQ(got.size(), want.size()) << "instance " << inst;
    for (const auto& [k, p] : want) {
      ASSERT_TRUE(got.count(k));
      EXPECT_LT((got[k] - p).norm(), 1e-9);
    }
    for (std::size_t i = 1; i < hits.size(); ++i) {
      const Point &a = hits[i - 1].point, &b = hits[i].point;
      EXPECT_TRUE(a.x() < b.x() + 1e-12 || (std::abs(a.x() - b.x()) <= 1e-12));
    }
  }
}

TEST(Dual, PointsReproduceTangentLines) {
  const auto l = graph_line(xsinx, 0.0, 4 * std::numbers::pi, 20.0);
  const DualCurve d = dual_curve(l);
  const auto& p = l.points;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (!d.valid[i]) continue;
    const Line line = d.line(i);
    EXPECT_LT(line.distance(p[i]), 1e-6);
    const Point t = (p[i + 1] - p[i - 1]).normalized();
    EXPECT_LT(std::abs(line.normal().dot(t)), 1e-9);
  }
}

TEST(Dual, AllTangentsThroughOriginIsDegenerate) {
  LevelLine l;
  for (int i = 0; i < 20; ++i) l.points.emplace_back(i, i);
  try {
    dual_curve(l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDual);
  }
}

TEST(Dual, ConvexCurveHasNoSelfIntersections) {
  EXPECT_EQ(dual_self_crossings(ellipse_line(60, 25, 0.3)), 0);
  EXPECT_EQ(dual_self_crossings(ellipse_line(40, 40, 0.0)), 0);
}

TEST(Dual, XSinXHasFourSelfIntersections) {
  for (double scale : {10.0, 20.0, 40.0}) EXPECT_EQ(dual_self_crossings(graph_line(xsinx, 0, 4 * std::numbers::pi, scale)), 4) << scale;
}

TEST(Dual, QuarticHasOneSelfIntersection) {
  EXPECT_EQ(dual_self_crossings(graph_line(quartic, -1.2, 1.2, 40.0)), 1);
}

TEST(Candidates, EllipseHasNone) {
  const auto l = ellipse_line(70, 30, 1.1);
  EXPECT_TRUE(candidate_bitangents(l, annotate(l)).empty());
}

TEST(Candidates, XSinXHasFour) {
  const auto l = graph_line(xsinx, 0, 4 * std::numbers::pi, 20.0);
  const auto ann = annotate(l);
  const auto bts = candidate_bitangents(l, ann);
  ASSERT_EQ(bts.size(), 4u);
  for (const auto& b : bts) {
    EXPECT_LT(b.line.distance(b.p1), 2.0);
    EXPECT_LT(b.line.distance(b.p2), 2.0);
    EXPECT_LT(b.i1, b.i2);
    EXPECT_GE(b.inflection_length, 2);
  }
}

TEST(Candidates, QuarticRecoversAlgebraicBitangent) {
  // x^4 - x^2 + 1/4 = (x^2 - 1/2)^2: tangent to y = -1/4 at x = +-1/sqrt(2).
  const double scale = 40.0;
  const auto l = graph_line(quartic, -1.2, 1.2, scale);
  const auto bts = candidate_bitangents(l, annotate(l));
  ASSERT_EQ(bts.size(), 1u);
  const auto& b = bts[0];
  EXPECT_EQ(b.inflection_length, 2);
  const Point c1 = scale * Point(-1 / std::sqrt(2.0), -0.25), c2 = scale * Point(1 / std::sqrt(2.0), -0.25);
  EXPECT_LT((b.p1 - c1).norm(), 2.0);
  EXPECT_LT((b.p2 - c2).norm(), 2.0);
  EXPECT_NEAR(std::abs(b.line.b), 1.0, 1e-3);
  EXPECT_NEAR(-b.line.c / b.line.b, -0.25 * scale, 1.0);
  EXPECT_FALSE(b.crosses_curve);
}

TEST(Candidates, TwoInflectionClosedCurveHasOne) {
  // Kidney shape: one concavity, two inflections.
  LevelLine l;
  l.closed = true;
  for (int i = 0; i < 2000; ++i) {
    const double t = 2 * std::numbers::pi * i / 2000;
    const double r = 50.0 * (1.0 + 0.3 * std::exp(-std::pow(std::remainder(t, 2 * std::numbers::pi) / 0.5, 2)) * -1.5);
    l.points.emplace_back(100 + r * std::cos(t), 100 + r * std::sin(t));
  }
  l = resample_uniform(l, kDefaultSpacing);
  const auto ann = annotate(l);
  ASSERT_EQ(ann.inflections.size(), 2u);
  const auto bts = candidate_bitangents(l, ann);
  ASSERT_EQ(bts.size(), 1u);
  EXPECT_EQ(bts[0].inflection_length, 2);
  // Covered portion is the dent, which straddles angle 0.
  const Polyline cov = covered_portion(l, bts[0].i1, bts[0].i2);
  for (const auto& p : cov) EXPECT_GT(p.x(), 100.0);
}

TEST(Candidates, ChordCrossingFlag) {
  // A dip between the two contacts pokes through the bitangent y = -1/4.
  auto f = [](double x) { return quartic(x) - 0.5 * std::exp(-x * x / (2 * 0.1 * 0.1)); };
  const double scale = 40.0;
  const auto l = graph_line(f, -1.2, 1.2, scale);
  const auto bts = candidate_bitangents(l, annotate(l));
  bool found = false;
  for (const auto& b : bts) {
    if ((b.p1 - scale * Point(-1 / std::sqrt(2.0), -0.25)).norm() < 2.0 &&
        (b.p2 - scale * Point(1 / std::sqrt(2.0), -0.25)).norm() < 2.0) {
      found = true;
      EXPECT_TRUE(b.crosses_curve);
    }
  }
  EXPECT_TRUE(found);
}
