#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace shapereg {

// Row-major scalar field. Loaded 8-bit images are widened to [0, 255].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(int y) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  // Bilinear interpolation with clamped (replicated) borders.
  double sample(double x, double y) const;

  double min_value() const;
  double max_value() const;
  double mean() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Throws Error{InvalidImage} on a size below 8x8 or non-finite values.
void validate(const GrayImage& img);

// 8-bit PGM (P5 or P2) and PNG (converted to gray).
GrayImage load_image(const std::filesystem::path& path);
// Values are rounded and clamped to [0, 255].
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

}  // namespace shapereg
