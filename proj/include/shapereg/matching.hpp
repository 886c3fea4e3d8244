#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "shapereg/common.hpp"
#include "shapereg/frames.hpp"

namespace shapereg {

struct ShapeElement {
  CanonicalCurve canonical;
  Frame frame;  // source-image pixels
  int inflection_length = 0;
  int line = 0;  // level line index within its image
};

struct Match {
  int part = 0;   // index into the part element list
  int whole = 0;  // index into the whole element list
  double distance = 0.0;
  bool flipped = false;
};

// Maps part pixels to whole pixels: y = linear * x + translation.
struct AffineTransform {
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Point operator()(const Point& p) const { return linear * p + translation; }
  // Row-major 2x3.
  std::array<double, 6> row_major() const;
};

// Standard dynamic program over the coupling lattice. Throws EmptyCurve.
double discrete_frechet(std::span<const Point> p, std::span<const Point> q);

struct FreeSpace {
  int rows = 0;  // |P|
  int cols = 0;  // |Q|
  std::vector<std::uint8_t> reachable;  // row-major
  std::vector<std::pair<int, int>> path;  // monotone couplings (0,0) .. (rows-1, cols-1), empty if unreachable

  bool at(int i, int j) const { return reachable[static_cast<std::size_t>(i) * cols + j] != 0; }
  bool top_right() const { return at(rows - 1, cols - 1); }
};

// Cells (i, j) with d(P_i, Q_j) <= delta reached by a monotone path from
// (0, 0). Throws EmptyCurve.
FreeSpace free_space_reachable(std::span<const Point> p, std::span<const Point> q, double delta);

// Canonical curve of the same portion traversed backwards with the frame
// roles swapped (b1 <-> b2, c1 <-> c2): x -> 1 - x and reversed order.
std::vector<Point> reversed_canonical(std::span<const Point> canonical);

struct MatchOptions {
  double threshold = 0.15;
  int band_slack = 2;
};

// Keeps, for every part element and every whole level line, the closest
// whole element on that line (either orientation) when it is within the
// threshold and the inflection counts differ by at most band_slack. Sorted
// by (part, distance, whole).
std::vector<Match> match_elements(std::span<const ShapeElement> part, std::span<const ShapeElement> whole,
                                  const MatchOptions& opts = {});

struct InflectionBand {
  int min_len = 6;
  int max_len = 10;
};

// The band actually used for a part: when no part element reaches min_len,
// min_len drops to the longest available length if that is at least 3.
// Returns nullopt when nothing qualifies.
std::optional<InflectionBand> effective_band(std::span<const ShapeElement> part, const InflectionBand& band);

std::vector<ShapeElement> filter_band(std::span<const ShapeElement> elements, const InflectionBand& band);

// Least squares; exact for three pairs. Throws DegenerateCorrespondences for
// fewer than three pairs or collinear sources.
AffineTransform affine_from_correspondences(std::span<const Point> src, std::span<const Point> dst);

// The three correspondences a match contributes: b1, b2 and the cast point
// whose tangent makes the wider angle with the bitangent in the part frame.
// Roles follow the orientation flag.
void match_correspondences(const ShapeElement& part, const ShapeElement& whole, bool flipped,
                           std::array<Point, 3>& src, std::array<Point, 3>& dst);

struct RansacOptions {
  int iterations = 2000;
  double inlier_tol_px = 5.0;
  int min_inliers = 3;
  // Consensus counts inliers whose part-side centroids are pairwise farther
  // apart than this (greedy, in content order). 0 counts every inlier.
  double distinct_radius_px = 0.0;
  std::uint64_t seed = 0;
};

struct RansacResult {
  AffineTransform transform;
  std::vector<int> inliers;  // indices into the match list, ascending
  int support = 0;           // distinct inliers, see distinct_radius_px
};

// One match (three correspondences) per hypothesis. A match is an inlier
// when all three of its points reproject within the tolerance. The sampling
// order is keyed by match content, so permuting the input does not change
// the result. Throws ConsensusFailed when the support is below min_inliers.
RansacResult ransac_affine(std::span<const Match> matches, std::span<const ShapeElement> part,
                           std::span<const ShapeElement> whole, const RansacOptions& opts);

// Same, on raw correspondence triples.
struct Triple {
  std::array<Point, 3> src;
  std::array<Point, 3> dst;
};
RansacResult ransac_affine(std::span<const Triple> triples, const RansacOptions& opts);

}  // namespace shapereg
