#include "support/oracles.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>

namespace oracle {

GrayImage render_disk(int size, Point center, double radius, double inside, double outside,
                      int supersample) {
  GrayImage img(size, size, outside);
  const double step = 1.0 / supersample;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int hits = 0;
      for (int sy = 0; sy < supersample; ++sy) {
        for (int sx = 0; sx < supersample; ++sx) {
          const double px = x - 0.5 + (sx + 0.5) * step;
          const double py = y - 0.5 + (sy + 0.5) * step;
          if (std::hypot(px - center.x(), py - center.y()) <= radius) ++hits;
        }
      }
      const double f = static_cast<double>(hits) / (supersample * supersample);
      img.at(x, y) = outside + f * (inside - outside);
    }
  }
  return img;
}

double circle_radius_ode(double r0, double t, int steps) {
  auto f = [](double r) { return r > 0.0 ? -std::pow(r, -1.0 / 3.0) : 0.0; };
  double r = r0;
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(r);
    const double k2 = f(r + 0.5 * h * k1);
    const double k3 = f(r + 0.5 * h * k2);
    const double k4 = f(r + h * k3);
    r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return r;
}

double mean_crossing_radius(const GrayImage& img, Point center, double level, double r_max,
                            int rays) {
  double total = 0.0;
  for (int k = 0; k < rays; ++k) {
    const double th = 2.0 * std::numbers::pi * k / rays;
    const Point dir(std::cos(th), std::sin(th));
    auto val = [&](double r) {
      const Point p = center + r * dir;
      return img.sample(p.x(), p.y()) - level;
    };
    double lo = 0.0, hi = r_max;
    const bool inside_high = val(lo) > 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((val(mid) > 0.0) == inside_high) lo = mid; else hi = mid;
    }
    total += 0.5 * (lo + hi);
  }
  return total / rays;
}

}  // namespace oracle

namespace oracle {

std::vector<Point> sample_graph(const std::function<double(double)>& f, double x0, double x1,
                                int n, double scale) {
  std::vector<Point> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = x0 + (x1 - x0) * i / (n - 1);
    out.emplace_back(scale * x, scale * f(x));
  }
  return out;
}

std::vector<Point> circle_points(Point centre, double radius, int n, double phase) {
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    const double th = phase + 2.0 * std::numbers::pi * i / n;
    out.push_back(centre + radius * Point(std::cos(th), std::sin(th)));
  }
  return out;
}

double point_polyline_distance(const Point& p, const std::vector<Point>& line, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = line.size();
  if (n == 1) return (p - line[0]).norm();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const Point a = line[i], b = line[(i + 1) % n];
    const Point d = b - a;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, (a + t * d - p).norm());
  }
  return best;
}

double hausdorff(const std::vector<Point>& a, bool a_closed, const std::vector<Point>& b,
                 bool b_closed) {
  double h = 0.0;
  for (const auto& p : a) h = std::max(h, point_polyline_distance(p, b, b_closed));
  for (const auto& p : b) h = std::max(h, point_polyline_distance(p, a, a_closed));
  return h;
}

namespace {
double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}
}  // namespace

bool segments_cross(const Point& p, const Point& q, const Point& r, const Point& s) {
  const double d1 = orient(p, q, r), d2 = orient(p, q, s);
  const double d3 = orient(r, s, p), d4 = orient(r, s, q);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

int count_crossings(const std::vector<Point>& a, bool a_closed, const std::vector<Point>& b,
                    bool b_closed) {
  int count = 0;
  const std::size_t na = a_closed ? a.size() : a.size() - 1;
  const std::size_t nb = b_closed ? b.size() : b.size() - 1;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j)
      if (segments_cross(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) ++count;
  return count;
}

int count_self_crossings(const std::vector<Point>& a, bool closed) {
  int count = 0;
  const std::size_t n = a.size();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i)
    for (std::size_t j = i + 2; j < segs; ++j) {
      if (closed && i == 0 && j == segs - 1) continue;
      if (segments_cross(a[i], a[(i + 1) % n], a[j], a[(j + 1) % n])) ++count;
    }
  return count;
}

std::vector<double> roots(const std::function<double(double)>& f, double x0, double x1, int n) {
  std::vector<double> out;
  double xa = x0, fa = f(x0);
  for (int i = 1; i <= n; ++i) {
    const double xb = x0 + (x1 - x0) * i / n, fb = f(xb);
    if ((fa < 0) != (fb < 0)) {
      double lo = xa, hi = xb;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (lo + hi);
        ((f(m) < 0) == (fa < 0) ? lo : hi) = m;
      }
      out.push_back(0.5 * (lo + hi));
    }
    xa = xb, fa = fb;
  }
  return out;
}

}  // namespace oracle

namespace oracle {

GrayImage random_blobs(int size, unsigned seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, size - 1.0), amp(-70.0, 70.0), sig(3.0, size / 5.0);
  struct Bump { double x, y, a, s; };
  std::vector<Bump> bumps;
  for (int i = 0; i < count; ++i) bumps.push_back({pos(rng), pos(rng), amp(rng), sig(rng)});
  GrayImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double v = 128.0;
      for (const auto& b : bumps) v += b.a * std::exp(-((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) / (2 * b.s * b.s));
      img.at(x, y) = std::clamp(v, 0.0, 255.0);
    }
  return img;
}

}  // namespace oracle
