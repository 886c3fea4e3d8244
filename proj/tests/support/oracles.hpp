#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's algorithms beyond plain data types.

#include <functional>
#include <random>
#include <vector>

#include "shapereg/common.hpp"
#include "shapereg/image.hpp"

namespace oracle {

using shapereg::GrayImage;
using shapereg::Point;

// Disk rendered with s x s supersampling per pixel.
GrayImage render_disk(int size, Point center, double radius, double inside, double outside,
                      int supersample = 8);

// RK4 integration of the circle shrinkage ODE dr/dt = -r^(-1/3).
double circle_radius_ode(double r0, double t, int steps = 20000);

// Mean radius of the `level` crossing along `rays` rays from `center`,
// located by bisection on the bilinear interpolant.
double mean_crossing_radius(const GrayImage& img, Point center, double level, double r_max,
                            int rays = 360);

// Smooth test field: background plus a sum of random Gaussian bumps.
GrayImage random_blobs(int size, unsigned seed, int count = 12);

// Dense samples of the graph y = f(x), x in [x0, x1], scaled by `scale`.
std::vector<Point> sample_graph(const std::function<double(double)>& f, double x0, double x1,
                                int n, double scale = 1.0);

// Points of a circle, counter-clockwise in raw coordinates (clockwise on
// screen), starting at angle `phase`.
std::vector<Point> circle_points(Point centre, double radius, int n, double phase = 0.0);

// Distance from p to the polyline (closed adds the wrap segment).
double point_polyline_distance(const Point& p, const std::vector<Point>& line, bool closed);

// Symmetric Hausdorff distance between two polylines, evaluated on vertices.
double hausdorff(const std::vector<Point>& a, bool a_closed, const std::vector<Point>& b,
                 bool b_closed);

// Proper crossing test for segments pq and rs (interiors intersect at a single
// point, no shared endpoints or touching).
bool segments_cross(const Point& p, const Point& q, const Point& r, const Point& s);

// Number of proper crossings between two polylines, or of a polyline with
// itself when `self` is set (adjacent segments skipped).
int count_crossings(const std::vector<Point>& a, bool a_closed, const std::vector<Point>& b,
                    bool b_closed);
int count_self_crossings(const std::vector<Point>& a, bool closed);

// Roots of f on [x0, x1] by sign-change scan on n intervals plus bisection.
std::vector<double> roots(const std::function<double(double)>& f, double x0, double x1, int n = 100000);

}  // namespace oracle
