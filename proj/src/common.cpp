#include "shapereg/common.hpp"

namespace shapereg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::NonPositiveBias: return "NonPositiveBias";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::DegenerateDual: return "DegenerateDual";
    case ErrorCode::FitFailed: return "FitFailed";
    case ErrorCode::NoBitangents: return "NoBitangents";
    case ErrorCode::SelectionFailed: return "SelectionFailed";
    case ErrorCode::StraightEdge: return "StraightEdge";
    case ErrorCode::NoFrame: return "NoFrame";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::NearInfinityPoint: return "NearInfinityPoint";
    case ErrorCode::EmptyCurve: return "EmptyCurve";
    case ErrorCode::DegenerateCorrespondences: return "DegenerateCorrespondences";
    case ErrorCode::ConsensusFailed: return "ConsensusFailed";
    case ErrorCode::NoShapeElements: return "NoShapeElements";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Line Line::from_coefficients(double a, double b, double c) {
  const double n = std::hypot(a, b);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("line normal must be finite and non-zero");
  }
  return Line{a / n, b / n, c / n};
}

Line Line::through(const Point& p, const Point& q) {
  const Point d = q - p;
  return from_coefficients(-d.y(), d.x(), d.y() * p.x() - d.x() * p.y());
}

double polyline_length(std::span<const Point> pts, bool closed) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += (pts[i] - pts[i - 1]).norm();
  if (closed && pts.size() > 1) total += (pts.front() - pts.back()).norm();
  return total;
}

}  // namespace shapereg
