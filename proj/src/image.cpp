#include "shapereg/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include <png.h>

#include "shapereg/common.hpp"

namespace shapereg {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 8 || height < 8) {
    throw Error(ErrorCode::InvalidImage, "image must be at least 8x8, got " +
                                             std::to_string(width) + "x" + std::to_string(height));
  }
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 8 || height < 8) {
    throw Error(ErrorCode::InvalidImage, "image must be at least 8x8");
  }
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::InvalidImage, "value count does not match dimensions");
  }
}

double GrayImage::sample(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = std::min(static_cast<int>(x), width_ - 2);
  const int y0 = std::min(static_cast<int>(y), height_ - 2);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0);
  const double bottom = (1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1);
  return (1 - fy) * top + fy * bottom;
}

double GrayImage::min_value() const { return *std::min_element(values_.begin(), values_.end()); }
double GrayImage::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double GrayImage::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

void validate(const GrayImage& img) {
  if (img.width() < 8 || img.height() < 8) {
    throw Error(ErrorCode::InvalidImage, "image must be at least 8x8");
  }
  for (double v : img.values()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidImage, "image contains non-finite values");
  }
}

namespace {

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") {
    throw Error(ErrorCode::Io, path.string() + ": not a P5/P2 PGM file");
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, path.string() + ": malformed PGM header");
  }
  if (maxval <= 0 || maxval > 65535) throw Error(ErrorCode::Io, path.string() + ": bad maxval");
  const double scale = 255.0 / maxval;
  std::vector<double> values(static_cast<std::size_t>(w) * h);
  if (magic == "P5") {
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(values.size() * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw Error(ErrorCode::Io, path.string() + ": truncated pixel data");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
      values[i] = v * scale;
    }
  } else {
    for (auto& v : values) {
      int x;
      if (!(in >> x)) throw Error(ErrorCode::Io, path.string() + ": truncated pixel data");
      v = x * scale;
    }
  }
  return GrayImage(w, h, std::move(values));
}

GrayImage load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::Io, path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::Io, path.string() + ": " + msg);
  }
  std::vector<double> values(buffer.begin(), buffer.end());
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(values));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "no such file: " + path.string());
  std::ifstream probe(path, std::ios::binary);
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  if (png_sig_cmp(sig, 0, 8) == 0) return load_png(path);
  return load_pgm(path);
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  std::transform(img.values().begin(), img.values().end(), raw.begin(), [](double v) {
    return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
  });
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

}  // namespace shapereg
