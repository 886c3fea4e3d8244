#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "shapereg/bitangent.hpp"
#include "shapereg/common.hpp"
#include "shapereg/level_lines.hpp"

namespace shapereg {

using Homography = Eigen::Matrix3d;

// Vertex of the covered portion and its index within the portion polyline.

struct CastPoint {
  Point point;
  double position = 0.0;
};

struct Frame {
  Point b1, c1, c2, b2;
  double quality = 0.0;
  double c1_position = 0.0;
  double c2_position = 0.0;

  std::array<Point, 4> corners() const { return {b1, c1, c2, b2}; }
};

struct CanonicalCurve {
  std::vector<Point> points;
  int image = 0;
  double level = 0.0;
  int bitangent = 0;
  int frame = 0;
};

inline constexpr int kCanonicalPoints = 64;

// True when the line through vertices i and j leaves the `reach` neighbours
// on each side of both on one strict side: a bitangent of the polyline.
bool supports(const LevelLine& line, int i, int j, int reach);

// Replaces the contacts by the closest vertex pair within `radius` vertices
// that supports the polyline. Sidedness survives projective maps, so snapped
// contacts correspond exactly between a polyline and its image. Returns the
// input unchanged when no such pair exists.
Bitangent snap_contacts(const LevelLine& line, const Bitangent& bt, int radius = 2, int reach = 1);

// The covered portion from p1 to p2 with the contacts replacing the end
// vertices.
Polyline frame_portion(const LevelLine& line, const Bitangent& bt);

struct CastCandidates {
  std::vector<CastPoint> c1;  // tangents through b1
  std::vector<CastPoint> c2;  // tangents through b2
};

// Vertices of the portion where the line from b1 (resp. b2) is tangent to the
// polyline: both neighbours fall strictly on the same side of it, i.e. the
// side of the neighbours changes sign along the portion. `end_margin`
// vertices at each end are skipped. Throws NoFrame if either list is empty.
CastCandidates cast_points(std::span<const Point> portion, int end_margin = 2, int reach = 1);

struct FrameOptions {
  int max_frames = 3;
};

// sin(angle at b1) * sin(angle at b2) * |c1 - c2| / |b1 - b2|.
double frame_quality(const Point& b1, const Point& c1, const Point& c2, const Point& b2);

// True when b1, c1, c2, b2 is a strictly convex quadrilateral with no three
// points collinear (relative tolerance).
bool convex_frame(const Point& b1, const Point& c1, const Point& c2, const Point& b2);

// Convex combinations sorted by quality, best first, at most max_frames.
// Throws NoFrame if none is convex.
std::vector<Frame> build_frames(const Point& b1, const Point& b2, const CastCandidates& cands,
                                const FrameOptions& opts = {});

// 4-point DLT with Hartley normalization; H(2,2) = 1. Throws DegenerateFrame
// on collinear triples or a singular result.
Homography homography_dlt(std::span<const Point> src, std::span<const Point> dst);

Point apply(const Homography& h, const Point& p);

// Unit square corners for b1, c1, c2, b2.
std::array<Point, 4> unit_square();

// Maps the portion into the canonical frame and resamples it to `count`
// points by arc length. Throws NearInfinityPoint when the portion reaches
// the vanishing line of the frame homography.
CanonicalCurve canonical_curve(std::span<const Point> portion, const Frame& frame, int count = kCanonicalPoints);

// Uniform arc-length resampling of an open polyline to exactly `count`
// points, endpoints kept.
std::vector<Point> resample_count(std::span<const Point> points, int count);

}  // namespace shapereg
