#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace shapereg {

// Pixel convention shared by every module: pixel centers sit at integer
// coordinates, origin top-left, x to the right, y downward.
using Point = Eigen::Vector2d;
using Polyline = std::vector<Point>;

enum class ErrorCode {
  InvalidImage,
  DegenerateFit,
  NonPositiveBias,
  DegenerateCurve,
  DegenerateDual,
  FitFailed,
  NoBitangents,
  SelectionFailed,
  StraightEdge,
  NoFrame,
  DegenerateFrame,
  NearInfinityPoint,
  EmptyCurve,
  DegenerateCorrespondences,
  ConsensusFailed,
  NoShapeElements,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline double cross(const Point& a, const Point& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Left normal in raw coordinates: rotate by +90 degrees.
inline Point left_normal(const Point& d) { return {-d.y(), d.x()}; }

// Line a*x + b*y + c = 0 with (a, b) of unit length.
struct Line {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;

  static Line from_coefficients(double a, double b, double c);
  static Line through(const Point& p, const Point& q);
  // Dual (u, v) form: u*x + v*y + 1 = 0.
  static Line from_dual(double u, double v) { return from_coefficients(u, v, 1.0); }

  double signed_distance(const Point& p) const { return a * p.x() + b * p.y() + c; }
  double distance(const Point& p) const { return std::abs(signed_distance(p)); }
  Point direction() const { return {b, -a}; }
  Point normal() const { return {a, b}; }
  // Foot of the perpendicular from p.
  Point project(const Point& p) const { return p - signed_distance(p) * normal(); }
};

double polyline_length(std::span<const Point> pts, bool closed = false);

}  // namespace shapereg
