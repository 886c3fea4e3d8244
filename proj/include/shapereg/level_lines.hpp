#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "shapereg/common.hpp"
#include "shapereg/image.hpp"

namespace shapereg {

inline constexpr double kDefaultSpacing = 1.5;

// Iso-contour of the bilinear interpolant. The upper level set {u >= level}
// lies to the left of the direction of travel (raw coordinates), which makes
// the boundary of a bright blob clockwise on screen. Closed curves do not
// repeat their first point.
struct LevelLine {
  double level = 0.0;
  Polyline points;
  bool closed = false;

  std::size_t size() const { return points.size(); }
  double length() const { return polyline_length(points, closed); }
};

struct CurveAnnotation {
  // Signed curvature, positive where the curve turns left (towards the upper
  // level set).
  std::vector<double> curvature;
  // Unit normal towards the centre of the osculating circle.
  std::vector<Point> normal;
  std::vector<int> inflections;

  // Curvature vector k = curvature * normal.
  Point curvature_vector(std::size_t i) const { return curvature[i] * normal[i]; }
};

// Marching squares at each level; output ordered by level, then by the
// row-major position of the first cell of each curve. Curves shorter than
// three distinct vertices are dropped.
std::vector<LevelLine> extract_level_lines(const GrayImage& img, std::span<const double> levels);

// Arc-length resampling. Open curves keep both endpoints; closed curves keep
// vertex 0. Throws DegenerateCurve for zero length or fewer than 2 points.
LevelLine resample_uniform(const LevelLine& line, double spacing = kDefaultSpacing);

// Menger curvature per vertex plus hysteresis-filtered inflections: a sign
// change counts only between runs of >= 2 vertices whose |curvature| exceeds
// 0.25 x the median |curvature|. Each inflection index is the first vertex
// that takes the new sign.
CurveAnnotation annotate(const LevelLine& line);

// k * step for k >= 1, below 256.
std::vector<double> levels_by_step(int step);
// Union of [c - halfwidth, c + halfwidth] over centres, clipped to [0, 255].
std::vector<double> levels_around(std::span<const int> centres, int halfwidth);

// level,line,index,x,y rows with a header.
void write_level_lines_csv(std::ostream& os, std::span<const LevelLine> lines);

}  // namespace shapereg
