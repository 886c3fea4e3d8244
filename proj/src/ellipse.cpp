#include "shapereg/ellipse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace shapereg {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Conic Conic::from_vector(const Vec6& v) {
  Vec6 w = v;
  const double n = w.norm();
  if (n > 0.0) w /= n;
  if (w(0) + w(1) < 0.0) w = -w;
  return {w(0), w(1), w(2), w(3), w(4), w(5)};
}

Vec6 Conic::vector() const {
  Vec6 v;
  v << a, b, c, d, e, f;
  return v;
}

Eigen::Matrix3d Conic::matrix() const {
  Eigen::Matrix3d m;
  m << a, c / 2, d / 2, c / 2, b, e / 2, d / 2, e / 2, f;
  return m;
}

namespace {

Conic conic_from_matrix(const Eigen::Matrix3d& m) {
  Vec6 v;
  v << m(0, 0), m(1, 1), m(0, 1) + m(1, 0), m(0, 2) + m(2, 0), m(1, 2) + m(2, 1), m(2, 2);
  return Conic::from_vector(v);
}

Eigen::Matrix3d adjugate(const Eigen::Matrix3d& m) {
  Eigen::Matrix3d adj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
    }
  return adj;
}

Eigen::Vector3d homogeneous(const Line& l) { return {l.a, l.b, l.c}; }

Line line_from_homogeneous(const Eigen::Vector3d& h) { return Line::from_coefficients(h(0), h(1), h(2)); }

}  // namespace

double Conic::evaluate(const Point& p) const {
  const double x = p.x(), y = p.y();
  return a * x * x + b * y * y + c * x * y + d * x + e * y + f;
}

Point Conic::center() const {
  Eigen::Matrix2d q;
  q << 2 * a, c, c, 2 * b;
  return q.fullPivLu().solve(Eigen::Vector2d(-d, -e));
}

Eigen::Vector2d Conic::semi_axes() const {
  Eigen::Matrix2d q;
  q << a, c / 2, c / 2, b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
  const double f0 = evaluate(center());
  const auto lam = es.eigenvalues();
  return {std::sqrt(-f0 / lam(0)), std::sqrt(-f0 / lam(1))};
}

double Conic::angle() const {
  Eigen::Matrix2d q;
  q << a, c / 2, c / 2, b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
  const Eigen::Vector2d v = es.eigenvectors().col(0);
  return std::atan2(v.y(), v.x());
}

Point Conic::tangent_point(const Line& line) const {
  const Eigen::Vector3d p = adjugate(matrix()) * homogeneous(line);
  return {p(0) / p(2), p(1) / p(2)};
}

double Conic::tangency_residual(const Line& line) const {
  const Eigen::Matrix3d adj = adjugate(matrix());
  const Eigen::Vector3d l = homogeneous(line);
  return std::abs(l.dot(adj * l)) / (l.squaredNorm() * adj.norm());
}

Conic fit_ellipse(std::span<const Point> points) {
  const std::size_t n = points.size();
  if (n < 6) throw Error(ErrorCode::DegenerateFit, "ellipse fit needs at least 6 points");
  Point mean = Point::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> pca(cov);
  if (!(pca.eigenvalues()(1) > 0.0) || pca.eigenvalues()(0) < 1e-12 * pca.eigenvalues()(1)) {
    throw Error(ErrorCode::DegenerateFit, "points are collinear");
  }
  const double s = std::sqrt(cov.trace() / 2.0);

  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const Point q = (points[i] - mean) / s;
    d1.row(i) << q.x() * q.x(), q.y() * q.y(), q.x() * q.y();
    d2.row(i) << q.x(), q.y(), 1.0;
  }
  const Eigen::Matrix3d s1 = d1.transpose() * d1;
  const Eigen::Matrix3d s2 = d1.transpose() * d2;
  const Eigen::Matrix3d s3 = d2.transpose() * d2;
  const Eigen::Matrix3d t = -s3.fullPivLu().solve(s2.transpose());
  const Eigen::Matrix3d m = s1 + s2 * t;
  // Inverse of the constraint matrix [[0,2,0],[2,0,0],[0,0,-1]] applied on the left.
  Eigen::Matrix3d cm;
  cm.row(0) = m.row(1) / 2.0;
  cm.row(1) = m.row(0) / 2.0;
  cm.row(2) = -m.row(2);
  Eigen::EigenSolver<Eigen::Matrix3d> es(cm);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::FitFailed, "eigen decomposition failed");

  int best = -1;
  double best_cond = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3cd v = es.eigenvectors().col(k);
    if (std::abs(es.eigenvalues()(k).imag()) > 1e-9 * (1.0 + std::abs(es.eigenvalues()(k).real()))) continue;
    const Eigen::Vector3d r = v.real();
    const double cond = 4 * r(0) * r(1) - r(2) * r(2);
    if (cond > best_cond) best_cond = cond, best = k;
  }
  if (best < 0) throw Error(ErrorCode::FitFailed, "no admissible eigenvector");
  const Eigen::Vector3d a1 = es.eigenvectors().col(best).real();
  const Eigen::Vector3d a2 = t * a1;

  const double A = a1(0), B = a1(1), C = a1(2), D = a2(0), E = a2(1), F = a2(2);
  const double mx = mean.x(), my = mean.y(), s2i = 1.0 / (s * s);
  Vec6 v;
  v << A * s2i, B * s2i, C * s2i,
      (-2 * A * mx - C * my) * s2i + D / s,
      (-2 * B * my - C * mx) * s2i + E / s,
      (A * mx * mx + B * my * my + C * mx * my) * s2i - (D * mx + E * my) / s + F;
  if (!v.allFinite()) throw Error(ErrorCode::FitFailed, "non-finite conic");
  return Conic::from_vector(v);
}

const char* to_string(BitangentType t) {
  switch (t) {
    case BitangentType::LL: return "LL";
    case BitangentType::LR: return "LR";
    case BitangentType::RL: return "RL";
    case BitangentType::RR: return "RR";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Common tangents

namespace {

using Mat4 = Eigen::Matrix4d;
using Poly = std::vector<double>;  // ascending powers

struct Alpha {
  double a1, a2, a3, a4, a5, a6;
};

// Discriminant of the substitution y = u x + v:
// a1 u^2 + a2 v^2 + a3 uv + a4 u + a5 v + a6.
Alpha tangency_coefficients(const Conic& q) {
  return {q.e * q.e - 4 * q.b * q.f,       q.c * q.c - 4 * q.a * q.b,
          4 * q.b * q.d - 2 * q.c * q.e,   2 * q.d * q.e - 4 * q.c * q.f,
          2 * q.c * q.d - 4 * q.a * q.e,   q.d * q.d - 4 * q.a * q.f};
}

double tangency_value(const Alpha& al, double u, double v) {
  return al.a1 * u * u + al.a2 * v * v + al.a3 * u * v + al.a4 * u + al.a5 * v + al.a6;
}

double tangency_scale(const Alpha& al, double u, double v) {
  return std::abs(al.a1 * u * u) + std::abs(al.a2 * v * v) + std::abs(al.a3 * u * v) + std::abs(al.a4 * u) +
         std::abs(al.a5 * v) + std::abs(al.a6);
}

void companion_blocks(const Alpha& p, const Alpha& q, Mat4& c2, Mat4& c1, Mat4& c0) {
  c2.setZero();
  c1.setZero();
  c0.setZero();
  const Alpha* rows[2] = {&p, &q};
  for (int r = 0; r < 2; ++r) {
    const Alpha& al = *rows[r];
    // Row 2r multiplies by v (coefficients on v^3, v^2, v); row 2r+1 by 1.
    for (int shift = 0; shift < 2; ++shift) {
      const int row = 2 * r + shift;
      c0(row, 0 + shift) = al.a2;
      c0(row, 1 + shift) = al.a5;
      c0(row, 2 + shift) = al.a6;
      c1(row, 1 + shift) = al.a3;
      c1(row, 2 + shift) = al.a4;
      c2(row, 2 + shift) = al.a1;
    }
  }
}

struct Frame2 {
  Eigen::Matrix3d h;  // maps solve coordinates to image coordinates
};

Frame2 normalizing_frame(const Conic& e1, const Conic& e2, bool swap) {
  const Point c1 = e1.center(), c2 = e2.center();
  const Point o = 0.5 * (c1 + c2);
  const double r = std::max({(c1 - o).norm() + e1.semi_axes()(0), (c2 - o).norm() + e2.semi_axes()(0), 1e-12});
  Eigen::Matrix3d h;
  h << r, 0, o.x(), 0, r, o.y(), 0, 0, 1;
  if (swap) {
    Eigen::Matrix3d p;
    p << 0, 1, 0, 1, 0, 0, 0, 0, 1;
    h = h * p;
  }
  return {h};
}

struct RawSolve {
  std::vector<std::complex<double>> eigenvalues;
  std::vector<Eigen::Vector3d> lines;  // homogeneous, solve coordinates
};

RawSolve solve_pencil(const Conic& q1, const Conic& q2) {
  const Alpha p = tangency_coefficients(q1), q = tangency_coefficients(q2);
  Mat4 c2, c1, c0;
  companion_blocks(p, q, c2, c1, c0);
  Eigen::Matrix<double, 8, 8> A = Eigen::Matrix<double, 8, 8>::Zero(), B = Eigen::Matrix<double, 8, 8>::Zero();
  A.block<4, 4>(0, 4) = Mat4::Identity();
  A.block<4, 4>(4, 0) = -c0;
  A.block<4, 4>(4, 4) = -c1;
  B.block<4, 4>(0, 0) = Mat4::Identity();
  B.block<4, 4>(4, 4) = c2;

  Eigen::GeneralizedEigenSolver<Eigen::Matrix<double, 8, 8>> ges;
  ges.setMaxIterations(400);
  ges.compute(A, B, false);
  RawSolve out;
  if (ges.info() != Eigen::Success) return out;

  std::vector<double> reals;
  for (int k = 0; k < 8; ++k) {
    const std::complex<double> alpha = ges.alphas()(k);
    const double beta = ges.betas()(k);
    if (std::abs(beta) <= 1e-12 * std::abs(alpha) || beta == 0.0) continue;
    const std::complex<double> u = alpha / beta;
    if (!(std::abs(u) < 1e10)) continue;
    out.eigenvalues.push_back(u);
    if (std::abs(u.imag()) < 1e-8 * (1.0 + std::abs(u.real()))) reals.push_back(u.real());
  }
  std::sort(reals.begin(), reals.end());

  auto accept = [&](double u, double v) {
    const double r1 = std::abs(tangency_value(p, u, v)) / std::max(tangency_scale(p, u, v), 1e-300);
    const double r2 = std::abs(tangency_value(q, u, v)) / std::max(tangency_scale(q, u, v), 1e-300);
    return r1 < 1e-6 && r2 < 1e-6;
  };
  auto push_line = [&](double u, double v) {
    const Eigen::Vector3d l(u, -1.0, v);
    for (const auto& old : out.lines) {
      if ((old.normalized() - l.normalized()).norm() < 1e-9 || (old.normalized() + l.normalized()).norm() < 1e-9) return;
    }
    out.lines.push_back(l);
  };
  // Intercepts from the tangency quadratic of E1, kept if E2 agrees.
  auto intercepts_by_roots = [&](double u) {
    const double qa = p.a2, qb = p.a3 * u + p.a5, qc = p.a1 * u * u + p.a4 * u + p.a6;
    std::vector<double> vs;
    if (std::abs(qa) < 1e-300) {
      if (std::abs(qb) > 0) vs.push_back(-qc / qb);
    } else {
      const double disc = std::max(0.0, qb * qb - 4 * qa * qc);
      const double sq = std::sqrt(disc);
      const double t = -0.5 * (qb + std::copysign(sq, qb));
      if (t != 0.0) vs.push_back(qc / t);
      vs.push_back(t / qa);
    }
    return vs;
  };

  for (std::size_t i = 0; i < reals.size();) {
    std::size_t j = i + 1;
    while (j < reals.size() && std::abs(reals[j] - reals[i]) < 1e-6 * (1.0 + std::abs(reals[i]))) ++j;
    const std::size_t mult = j - i;
    double u = 0.0;
    for (std::size_t k = i; k < j; ++k) u += reals[k];
    u /= static_cast<double>(mult);
    bool done = false;
    if (mult == 1) {
      // Null vector of A - uB; y = [v^3 v^2 v 1, u(...)].
      const Eigen::Matrix<double, 8, 8> m = A - u * B;
      Eigen::JacobiSVD<Eigen::Matrix<double, 8, 8>> svd(m, Eigen::ComputeFullV);
      const Eigen::Matrix<double, 8, 1> y = svd.matrixV().col(7);
      if (std::abs(y(3)) > 1e-12 * y.norm()) {
        const double v = y(2) / y(3);
        if (accept(u, v)) {
          push_line(u, v);
          done = true;
        }
      }
    }
    if (!done) {
      // Repeated slope (parallel tangents) or an ill-conditioned vector.
      for (double v : intercepts_by_roots(u)) {
        if (accept(u, v)) push_line(u, v);
      }
    }
    i = j;
  }
  return out;
}

BitangentType make_type(bool left1, bool left2) {
  if (left1) return left2 ? BitangentType::LL : BitangentType::LR;
  return left2 ? BitangentType::RL : BitangentType::RR;
}

}  // namespace

PairBitangents ellipse_pair_bitangents(const Conic& e1, const Conic& e2) {
  if (!e1.is_ellipse() || !e2.is_ellipse()) throw std::invalid_argument("both conics must be ellipses");
  PairBitangents out;
  for (bool swap : {false, true}) {
    const Frame2 fr = normalizing_frame(e1, e2, swap);
    const Conic q1 = conic_from_matrix(fr.h.transpose() * e1.matrix() * fr.h);
    const Conic q2 = conic_from_matrix(fr.h.transpose() * e2.matrix() * fr.h);
    const RawSolve raw = solve_pencil(q1, q2);
    if (!swap) out.eigenvalues = raw.eigenvalues;
    const Eigen::Matrix3d hinv_t = fr.h.inverse().transpose();
    for (const auto& l : raw.lines) {
      const double slope = std::abs(l(0));
      if (!swap && slope > 1.0 + 1e-9) continue;
      if (swap && slope >= 1.0 - 1e-9) continue;
      const Line line = line_from_homogeneous(hinv_t * l);
      EllipseBitangent bt{line, BitangentType::LL, true, e1.tangent_point(line), e2.tangent_point(line)};
      const Point dir = bt.contact2 - bt.contact1;
      bt.type = make_type(cross(dir, e1.center() - bt.contact1) > 0, cross(dir, e2.center() - bt.contact2) > 0);
      bt.external = bt.type == BitangentType::LL || bt.type == BitangentType::RR;
      out.lines.push_back(bt);
    }
  }
  if (out.lines.size() < 2) {
    throw Error(ErrorCode::NoBitangents, "only " + std::to_string(out.lines.size()) + " common tangents found");
  }
  // Order by contact angle on E1 (increasing atan2 in raw coordinates).
  const Point c1 = e1.center();
  std::sort(out.lines.begin(), out.lines.end(), [&](const auto& x, const auto& y) {
    const Point dx = x.contact1 - c1, dy = y.contact1 - c1;
    return std::atan2(dx.y(), dx.x()) < std::atan2(dy.y(), dy.x());
  });
  return out;
}

namespace {

Poly poly_mul(const Poly& x, const Poly& y) {
  Poly r(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) r[i + j] += x[i] * y[j];
  return r;
}

Poly poly_add(const Poly& x, const Poly& y, double sy = 1.0) {
  Poly r(std::max(x.size(), y.size()), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) r[i] += x[i];
  for (std::size_t i = 0; i < y.size(); ++i) r[i] += sy * y[i];
  return r;
}

Poly poly_det(const std::vector<std::vector<Poly>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  Poly acc{0.0};
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<std::vector<Poly>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Poly> row;
      for (std::size_t c = 0; c < n; ++c)
        if (c != col) row.push_back(m[r][c]);
      minor.push_back(row);
    }
    acc = poly_add(acc, poly_mul(m[0][col], poly_det(minor)), col % 2 == 0 ? 1.0 : -1.0);
  }
  return acc;
}

}  // namespace

std::vector<std::complex<double>> determinant_roots(const Conic& e1, const Conic& e2) {
  const Frame2 fr = normalizing_frame(e1, e2, false);
  const Alpha p = tangency_coefficients(conic_from_matrix(fr.h.transpose() * e1.matrix() * fr.h));
  const Alpha q = tangency_coefficients(conic_from_matrix(fr.h.transpose() * e2.matrix() * fr.h));
  std::vector<std::vector<Poly>> c(4, std::vector<Poly>(4, Poly{0.0}));
  const Alpha* rows[2] = {&p, &q};
  for (int r = 0; r < 2; ++r) {
    const Alpha& al = *rows[r];
    for (int shift = 0; shift < 2; ++shift) {
      c[2 * r + shift][0 + shift] = {al.a2};
      c[2 * r + shift][1 + shift] = {al.a5, al.a3};
      c[2 * r + shift][2 + shift] = {al.a6, al.a4, al.a1};
    }
  }
  Poly det = poly_det(c);
  double mx = 0.0;
  for (double v : det) mx = std::max(mx, std::abs(v));
  while (det.size() > 1 && std::abs(det.back()) <= 1e-12 * mx) det.pop_back();
  const int deg = static_cast<int>(det.size()) - 1;
  std::vector<std::complex<double>> roots;
  if (deg < 1) return roots;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -det[i] / det[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  for (int i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

BitangentType usable_type(const Conic& e1, const Conic& e2, const Point& k1, const Point& k2) {
  const Point off = e2.center() - e1.center();
  int cs;  // 1..4
  if (std::abs(off.x()) > std::abs(off.y())) {
    cs = off.x() > 0 ? 1 : 3;
  } else {
    cs = off.y() < 0 ? 2 : 4;
  }
  const bool horizontal = cs == 1 || cs == 3;
  const bool pos1 = horizontal ? k1.y() > 0 : k1.x() > 0;
  const bool pos2 = horizontal ? k2.y() > 0 : k2.x() > 0;
  const int pattern = pos1 ? (pos2 ? 0 : 1) : (pos2 ? 2 : 3);
  static constexpr BitangentType kForward[4] = {BitangentType::LL, BitangentType::LR, BitangentType::RL,
                                                BitangentType::RR};
  static constexpr BitangentType kBackward[4] = {BitangentType::RR, BitangentType::RL, BitangentType::LR,
                                                 BitangentType::LL};
  return (cs <= 2 ? kForward : kBackward)[pattern];
}

EllipseBitangent select_usable(const Conic& e1, const Conic& e2, const Point& k1, const Point& k2,
                               std::span<const EllipseBitangent> candidates) {
  const BitangentType want = usable_type(e1, e2, k1, k2);
  for (const auto& c : candidates) {
    if (c.type == want) return c;
  }
  throw Error(ErrorCode::SelectionFailed, std::string("no ") + to_string(want) + " bitangent among candidates");
}

// ---------------------------------------------------------------------------
// Refinement

double line_fit_rms(std::span<const Point> points) {
  if (points.size() < 2) return 0.0;
  Point mean = Point::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  return std::sqrt(std::max(0.0, es.eigenvalues()(0)));
}

std::vector<int> fit_window(const LevelLine& line, const CurveAnnotation& ann, int index, int window) {
  const int n = static_cast<int>(line.points.size());
  auto is_inflection = [&](int i) {
    return std::binary_search(ann.inflections.begin(), ann.inflections.end(), i);
  };
  auto wrap = [&](int i) { return ((i % n) + n) % n; };
  std::vector<int> before, after;
  // Backwards: the inflection vertex already carries this side's sign.
  if (!is_inflection(index)) {
    for (int k = 1; k <= window && k < n / 2; ++k) {
      const int i = index - k;
      if (!line.closed && i < 0) break;
      before.push_back(wrap(i));
      if (is_inflection(wrap(i))) break;
    }
  }
  for (int k = 1; k <= window && k < n / 2; ++k) {
    const int i = index + k;
    if (!line.closed && i >= n) break;
    if (is_inflection(wrap(i))) break;
    after.push_back(wrap(i));
  }
  // Balance the two sides so an early cut on one side does not skew the fit.
  const std::size_t side = std::max<std::size_t>(std::min(before.size(), after.size()), 3);
  if (before.size() > side) before.resize(side);
  if (after.size() > side) after.resize(side);
  std::vector<int> out(before.rbegin(), before.rend());
  out.push_back(index);
  out.insert(out.end(), after.begin(), after.end());
  return out;
}

namespace {

struct Snap {
  Point point;
  int index;
};

// Closest point of the curve to `target`, searched over the segments spanned
// by the window (padded by a few vertices).
Snap snap_to_curve(const LevelLine& line, const std::vector<int>& window, const Point& target) {
  const int n = static_cast<int>(line.points.size());
  const int pad = 3;
  Snap best{line.points[window.front()], window.front()};
  double best_d = std::numeric_limits<double>::infinity();
  const int count = static_cast<int>(window.size()) + 2 * pad;
  for (int k = 0; k + 1 < count; ++k) {
    int i0 = window.front() - pad + k, i1 = i0 + 1;
    if (line.closed) {
      i0 = ((i0 % n) + n) % n;
      i1 = ((i1 % n) + n) % n;
    } else if (i0 < 0 || i1 >= n) {
      continue;
    }
    const Point a = line.points[i0], b = line.points[i1];
    const Point d = b - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0 ? std::clamp((target - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    const Point q = a + t * d;
    const double dist = (q - target).norm();
    if (dist < best_d) {
      best_d = dist;
      best = {q, t < 0.5 ? i0 : i1};
    }
  }
  return best;
}

Point mean_curvature_vector(const CurveAnnotation& ann, const std::vector<int>& idx) {
  Point k = Point::Zero();
  for (int i : idx) k += ann.curvature_vector(static_cast<std::size_t>(i));
  return k / static_cast<double>(idx.size());
}

std::vector<Point> gather(const LevelLine& line, const std::vector<int>& idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(line.points[i]);
  return out;
}

}  // namespace

Bitangent refine_bitangent(const LevelLine& line, const CurveAnnotation& ann, const Bitangent& candidate,
                           const RefineOptions& opts) {
  const auto w1 = fit_window(line, ann, candidate.i1, opts.window);
  const auto w2 = fit_window(line, ann, candidate.i2, opts.window);
  const auto pts1 = gather(line, w1), pts2 = gather(line, w2);
  const Polyline covered = covered_portion(line, candidate.i1, candidate.i2);
  if (line_fit_rms(covered) < opts.straight_rms || line_fit_rms(pts1) < opts.straight_rms ||
      line_fit_rms(pts2) < opts.straight_rms) {
    throw Error(ErrorCode::StraightEdge, "contact neighbourhood is nearly straight");
  }
  const Conic e1 = fit_ellipse(pts1);
  const Conic e2 = fit_ellipse(pts2);
  const PairBitangents pair = ellipse_pair_bitangents(e1, e2);
  const Point k1 = mean_curvature_vector(ann, w1), k2 = mean_curvature_vector(ann, w2);
  const EllipseBitangent chosen = select_usable(e1, e2, k1, k2, pair.lines);

  Snap s1 = snap_to_curve(line, w1, chosen.contact1);
  Snap s2 = snap_to_curve(line, w2, chosen.contact2);
  if (!line.closed && s1.index > s2.index) std::swap(s1, s2);
  if (s1.index == s2.index) throw Error(ErrorCode::SelectionFailed, "refined contacts collapse");

  Bitangent out = candidate;
  out.line = chosen.line;
  out.i1 = s1.index;
  out.i2 = s2.index;
  out.p1 = s1.point;
  out.p2 = s2.point;
  out.residual = std::max(out.line.distance(out.p1), out.line.distance(out.p2));
  if (!(out.residual < opts.max_residual)) {
    throw Error(ErrorCode::SelectionFailed, "refined contact residual " + std::to_string(out.residual) + " px");
  }
  out.inflection_length = inflections_between(line, ann, out.i1, out.i2);
  out.crosses_curve = chord_crosses_curve(line, out.i1, out.i2, out.p1, out.p2);
  return out;
}

std::vector<Bitangent> prune_bitangents(std::span<const Bitangent> bitangents, double merge_radius) {
  const std::size_t n = bitangents.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto close = [&](const Bitangent& x, const Bitangent& y) {
    const bool direct = (x.p1 - y.p1).norm() <= merge_radius && (x.p2 - y.p2).norm() <= merge_radius;
    const bool swapped = (x.p1 - y.p2).norm() <= merge_radius && (x.p2 - y.p1).norm() <= merge_radius;
    return direct || swapped;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (close(bitangents[i], bitangents[j])) parent[find(i)] = find(j);

  std::vector<std::size_t> keep(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (keep[r] == n) {
      keep[r] = i;
      continue;
    }
    const Bitangent &cur = bitangents[keep[r]], &cand = bitangents[i];
    if (cand.inflection_length > cur.inflection_length ||
        (cand.inflection_length == cur.inflection_length && cand.residual < cur.residual)) {
      keep[r] = i;
    }
  }
  std::vector<Bitangent> out;
  for (std::size_t r = 0; r < n; ++r)
    if (keep[r] != n) out.push_back(bitangents[keep[r]]);
  std::stable_sort(out.begin(), out.end(), [](const Bitangent& x, const Bitangent& y) { return x.i1 < y.i1; });
  return out;
}

}  // namespace shapereg
