#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shapereg/bitangent.hpp"
#include "shapereg/common.hpp"
#include "shapereg/level_lines.hpp"

namespace shapereg {

// a x^2 + b y^2 + c xy + d x + e y + f = 0, coefficient vector of unit norm.
struct Conic {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  static Conic from_vector(const Eigen::Matrix<double, 6, 1>& v);
  Eigen::Matrix<double, 6, 1> vector() const;
  // Symmetric 3x3 form: [x y 1] M [x y 1]^T.
  Eigen::Matrix3d matrix() const;

  bool is_ellipse() const { return 4 * a * b - c * c > 0; }
  double evaluate(const Point& p) const;
  Point center() const;
  // Semi-axes (major, minor) and the major-axis angle in radians.
  Eigen::Vector2d semi_axes() const;
  double angle() const;

  // Contact point of a tangent line (pole of the line).
  Point tangent_point(const Line& line) const;
  // Relative discriminant of the line/conic substitution; zero for tangents.
  double tangency_residual(const Line& line) const;
};

// Direct least-squares ellipse fit in the [x^2, y^2, xy, x, y, 1] ordering
// with the quadratic-part constraint 4ab - c^2 = 1. Points are centred and
// scaled before fitting.
Conic fit_ellipse(std::span<const Point> points);

enum class BitangentType { LL, LR, RL, RR };
const char* to_string(BitangentType t);

struct EllipseBitangent {
  Line line;
  BitangentType type;
  bool external;
  Point contact1;  // on E1
  Point contact2;  // on E2
};

struct PairBitangents {
  std::vector<EllipseBitangent> lines;
  // Finite eigenvalues of the companion pencil in the un-swapped solve, in
  // normalized coordinates (slopes are unchanged by the normalization).
  std::vector<std::complex<double>> eigenvalues;
};

// Up to 4 common tangents of two ellipses from the companion pencil
// A y = u B y of the tangency system. Lines with |slope| <= 1 come from the
// direct solve, steeper ones from a solve with x and y exchanged. Complex
// eigenvalues are dropped. Types are read off the geometry: for the line
// directed from the E1 contact to the E2 contact, an ellipse is L when its
// centre lies on the left (raw coordinates). Throws NoBitangents with fewer
// than 2 lines.
PairBitangents ellipse_pair_bitangents(const Conic& e1, const Conic& e2);

// Roots of det C(u) of the quadratic matrix polynomial, via the scalar
// determinant polynomial (reference route for the pencil eigenvalues).
std::vector<std::complex<double>> determinant_roots(const Conic& e1, const Conic& e2);

// Case from the centre offset E2 - E1 (dominant axis; ties go to the
// vertical cases), pattern from the curvature-vector component signs.
BitangentType usable_type(const Conic& e1, const Conic& e2, const Point& k1, const Point& k2);

// Candidate with the usable type. Throws SelectionFailed if absent.
EllipseBitangent select_usable(const Conic& e1, const Conic& e2, const Point& k1, const Point& k2,
                               std::span<const EllipseBitangent> candidates);

struct RefineOptions {
  int window = 15;
  double straight_rms = 0.1;
  double max_residual = 0.5;
};

// Total-least-squares line fit RMS residual.
double line_fit_rms(std::span<const Point> points);

// Vertex range around `index` used for the local ellipse fit: up to `window`
// vertices on each side, cut at the nearest inflections and curve ends, then
// balanced so both sides have the same count (at least 3 where available).
std::vector<int> fit_window(const LevelLine& line, const CurveAnnotation& ann, int index, int window);

// Refit both contact neighbourhoods with ellipses and replace the candidate
// line by the usable ellipse bitangent; contacts snap to the closest point of
// the curve. Throws StraightEdge, DegenerateFit, FitFailed, NoBitangents or
// SelectionFailed.
Bitangent refine_bitangent(const LevelLine& line, const CurveAnnotation& ann, const Bitangent& candidate,
                           const RefineOptions& opts = {});

// Single-linkage merge of bitangents whose endpoints both lie within
// merge_radius; keeps the longest (then lowest residual) per cluster, sorted
// by first endpoint index.
std::vector<Bitangent> prune_bitangents(std::span<const Bitangent> bitangents, double merge_radius = 3.0);

}  // namespace shapereg
