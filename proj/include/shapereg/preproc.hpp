#pragma once

#include <vector>

#include "shapereg/image.hpp"

namespace shapereg {

inline constexpr double kDefaultAmssScale = 2.0;
inline constexpr double kDefaultAmssTimeStep = 0.05;

// Affine morphological scale space: u_t = |Du| curv(u)^(1/3), explicit
// central-difference scheme with Neumann borders. Each update is clamped to
// the 3x3 neighbourhood range, so no new extrema appear. scale == 0 returns
// the input. The step is shrunk so that an integer number of steps lands
// exactly on `scale`.
GrayImage amss_smooth(const GrayImage& img, double scale = kDefaultAmssScale,
                      double time_step = kDefaultAmssTimeStep);

// Legendre polynomial P_k(t).
double legendre(int k, double t);

// Separable Legendre surface over pixel coordinates mapped to [-1, 1]^2.
// coefficients[i * (degree_n + 1) + j] multiplies P_i(x) * P_j(y).
struct BiasModel {
  int degree_m = 0;
  int degree_n = 0;
  std::vector<double> coefficients;

  double evaluate_normalized(double xn, double yn) const;
  // Surface sampled at every pixel of a width x height grid.
  GrayImage surface(int width, int height) const;
};

// Least-squares fit of the bias surface. Throws DegenerateFit when the design
// matrix is rank deficient or has too few rows.
BiasModel fit_bias(const GrayImage& img, int degree_m = 2, int degree_n = 2);

// Multiplicative correction: divide by the surface normalized to unit mean,
// then rescale so the image mean is unchanged. Throws NonPositiveBias if the
// surface touches zero or goes negative anywhere on the grid.
GrayImage correct_bias(const GrayImage& img, const BiasModel& model);

}  // namespace shapereg
