#pragma once

#include <span>
#include <vector>

#include "shapereg/common.hpp"
#include "shapereg/level_lines.hpp"

namespace shapereg {

// Tangent lines u*x' + v*y' + 1 = 0 in coordinates x' = x - origin.
struct DualCurve {
  Point origin = Point::Zero();
  std::vector<Point> points;
  std::vector<char> valid;
  // Dual segment i joins points[i] and points[i+1] (wrapping for closed
  // curves). Dropped when either end is invalid or when the tangent sweeps
  // through the origin between the two vertices (the dual jumps through
  // infinity there).
  std::vector<char> segment_valid;
  bool closed = false;

  // Tangent line of vertex i in raw image coordinates.
  Line line(std::size_t i) const;
  Line line_at(const Point& uv) const;
};

// Centred finite-difference tangents. Throws DegenerateDual if no vertex has
// a finite dual point.
DualCurve dual_curve(const LevelLine& line);

struct Segment2 {
  Point a;
  Point b;
};

struct SweepHit {
  Point point;
  int first;   // smaller segment id
  int second;  // larger segment id
};

// Bentley-Ottmann sweep reporting proper crossings (interiors meet at one
// point). Touching endpoints and collinear overlaps are not reported. Output
// is in sweep order: lexicographic by (x, y) of the crossing.
std::vector<SweepHit> sweep_intersections(std::span<const Segment2> segments);

struct Bitangent {
  Line line;
  // Covered portion runs forward from i1 to i2 (wrapping for closed curves).
  int i1 = 0;
  int i2 = 0;
  Point p1 = Point::Zero();
  Point p2 = Point::Zero();
  int inflection_length = 0;
  bool crosses_curve = false;
  double residual = 0.0;  // max contact distance to the line
};

struct CandidateOptions {
  int min_separation = 3;     // crossings of dual segments closer than this are dropped
  double contact_tolerance = 2.0;
};

std::vector<Bitangent> candidate_bitangents(const LevelLine& line, const CurveAnnotation& ann,
                                            const CandidateOptions& opts = {});

// Vertices of the covered portion, in curve order, endpoints included.
Polyline covered_portion(const LevelLine& line, int i1, int i2);
int covered_count(const LevelLine& line, int i1, int i2);
// Inflections strictly inside the covered portion.
int inflections_between(const LevelLine& line, const CurveAnnotation& ann, int i1, int i2);
// For closed curves picks the arc that stays within the slab spanned by the
// contact points (shorter arc on a tie) and returns (start, end) of the
// forward traversal; open curves return (min, max).
std::pair<int, int> choose_covered_arc(const LevelLine& line, int a, int b);
// True when the chord between the contacts properly crosses the curve away
// from the contacts.
bool chord_crosses_curve(const LevelLine& line, int i1, int i2, const Point& p1, const Point& p2);

}  // namespace shapereg
