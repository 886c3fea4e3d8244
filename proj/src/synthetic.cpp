#include "shapereg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace shapereg {

namespace {

constexpr double kTau = 2 * std::numbers::pi;

void remap_and_noise(GrayImage& img, double gamma, double sigma, bool quantize, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& v : img.values()) {
    double w = 255.0 * std::pow(std::clamp(v, 0.0, 255.0) / 255.0, gamma) + sigma * noise(rng);
    w = std::clamp(w, 0.0, 255.0);
    v = quantize ? std::round(w) : w;
  }
}

}  // namespace

GrayImage synth_whole(std::uint64_t seed, int size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  struct Wave {
    double kx, ky, phase, amp;
  };
  // Log-uniform wavelengths; the short ones ripple the contours.
  std::vector<Wave> waves(40);
  for (auto& w : waves) {
    const double wavelength = 22.0 * std::pow(150.0 / 22.0, u(rng));
    const double dir = kTau * u(rng);
    const double amp = std::pow(wavelength / 150.0, 0.7) * (0.5 + 0.5 * u(rng));
    w = {kTau / wavelength * std::cos(dir), kTau / wavelength * std::sin(dir), kTau * u(rng), amp};
  }
  double norm = 0.0;
  for (const auto& w : waves) norm += 0.5 * w.amp * w.amp;
  norm = 1.0 / std::sqrt(norm);
  // Terrace thresholds of the unit-variance field; each contour becomes a
  // blurred step edge of a couple of pixels.
  const double thresholds[] = {-1.2, -0.6, 0.0, 0.6, 1.2};
  const double step = 38.0, width = 1.6;
  GrayImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double f = 0.0, gx = 0.0, gy = 0.0;
      for (const auto& w : waves) {
        const double arg = w.kx * x + w.ky * y + w.phase;
        f += w.amp * std::cos(arg);
        gx -= w.amp * w.kx * std::sin(arg);
        gy -= w.amp * w.ky * std::sin(arg);
      }
      f *= norm;
      const double grad = std::max(std::hypot(gx, gy) * norm, 1e-3);
      double v = 128.0 - step * 2.5;
      for (double t : thresholds) v += step * 0.5 * (1.0 + std::tanh((f - t) / (grad * width)));
      img.at(x, y) = v + 6.0 * std::sin(0.006 * x + 0.004 * y);
    }
  return img;
}

PlantedPart synth_part(const GrayImage& whole, std::uint64_t seed, const PartOptions& opts) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlantedPart out;
  // Draw everything so the crop position does not depend on the overrides.
  const double angle = kTau * u(rng);
  const bool flipped = u(rng) < 0.5 && opts.allow_flip;
  const double gamma = std::exp(std::log(0.5) + (std::log(2.0) - std::log(0.5)) * u(rng));
  out.angle = opts.angle.value_or(angle);
  out.flipped = opts.flipped.value_or(flipped);
  out.gamma = opts.gamma.value_or(gamma);
  const double half = 0.5 * (opts.size - 1);
  const double reach = half * std::sqrt(2.0) + 2;
  const Point c(reach + (whole.width() - 1 - 2 * reach) * u(rng), reach + (whole.height() - 1 - 2 * reach) * u(rng));
  Eigen::Matrix2d rot;
  rot << std::cos(out.angle), -std::sin(out.angle), std::sin(out.angle), std::cos(out.angle);
  Eigen::Matrix2d flip = Eigen::Matrix2d::Identity();
  if (out.flipped) flip(0, 0) = -1;
  out.truth.linear = rot * flip;
  out.truth.translation = c - out.truth.linear * Point(half, half);
  out.image = GrayImage(opts.size, opts.size);
  for (int y = 0; y < opts.size; ++y)
    for (int x = 0; x < opts.size; ++x) {
      const Point p = out.truth(Point(x, y));
      out.image.at(x, y) = whole.sample(p.x(), p.y());
    }
  remap_and_noise(out.image, out.gamma, opts.noise_sigma, opts.quantize, rng);
  return out;
}

AmbiguousPair synth_ambiguous(std::uint64_t seed, int whole_size, int part_size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AmbiguousPair out;
  out.whole = synth_whole(rng(), whole_size);
  // Small discs of the whole, each rotated on its own and scattered without
  // overlap: every disc agrees locally with its source, no map agrees with two.
  const double radius = 18.0, margin = radius + 4.0;
  std::vector<Point> placed;
  out.part = GrayImage(part_size, part_size, 128.0);
  for (int attempt = 0; attempt < 400 && placed.size() < 12; ++attempt) {
    const Point c(margin + (part_size - 2 * margin) * u(rng), margin + (part_size - 2 * margin) * u(rng));
    if (std::any_of(placed.begin(), placed.end(), [&](const Point& q) { return (q - c).norm() < 2 * margin; })) continue;
    placed.push_back(c);
    const Point src(margin + (whole_size - 2 * margin) * u(rng), margin + (whole_size - 2 * margin) * u(rng));
    const double a = kTau * u(rng), ca = std::cos(a), sa = std::sin(a);
    for (int y = int(c.y() - margin); y <= int(c.y() + margin); ++y)
      for (int x = int(c.x() - margin); x <= int(c.x() + margin); ++x) {
        const double dx = x - c.x(), dy = y - c.y();
        const double alpha = 0.5 * (1.0 - std::tanh((std::hypot(dx, dy) - radius) / 1.5));
        const double v = out.whole.sample(src.x() + ca * dx - sa * dy, src.y() + sa * dx + ca * dy);
        out.part.at(x, y) += alpha * (v - out.part.at(x, y));
      }
  }
  remap_and_noise(out.part, 1.0, 1.0, true, rng);
  return out;
}

}  // namespace shapereg
