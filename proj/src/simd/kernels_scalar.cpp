#include <algorithm>
#include <cmath>

#include "shapereg/simd/kernels.hpp"

namespace shapereg::simd::scalar {

void amss_row(const double* up, const double* mid, const double* down, double* out,
              std::size_t width, double dt) {
  for (std::size_t i = 0; i < width; ++i) {
    const double c = mid[i];
    const double l = mid[i - 1], r = mid[i + 1];
    const double t = up[i], b = down[i];
    const double tl = up[i - 1], tr = up[i + 1];
    const double bl = down[i - 1], br = down[i + 1];

    const double ux = (r - l) * 0.5;
    const double uy = (b - t) * 0.5;
    const double uxx = r - 2.0 * c + l;
    const double uyy = b - 2.0 * c + t;
    const double uxy = (br - bl - tr + tl) * 0.25;
    // |Du| * curv^(1/3) == cbrt(|Du|^2 * u_tangent_tangent).
    const double num = uxx * (uy * uy) - 2.0 * uxy * (ux * uy) + uyy * (ux * ux);
    double v = c + dt * std::cbrt(num);

    const double lo = std::min({c, l, r, t, b, tl, tr, bl, br});
    const double hi = std::max({c, l, r, t, b, tl, tr, bl, br});
    out[i] = std::clamp(v, lo, hi);
  }
}

void distance_row(double px, double py, const double* q, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = px - q[2 * j];
    const double dy = py - q[2 * j + 1];
    out[j] = std::sqrt(dx * dx + dy * dy);
  }
}

void project_points(const double* h, const double* in, double* out, double* w, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double x = in[2 * j], y = in[2 * j + 1];
    const double X = h[0] * x + h[1] * y + h[2];
    const double Y = h[3] * x + h[4] * y + h[5];
    const double W = h[6] * x + h[7] * y + h[8];
    out[2 * j] = X / W;
    out[2 * j + 1] = Y / W;
    w[j] = W;
  }
}

}  // namespace shapereg::simd::scalar
