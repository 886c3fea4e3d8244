#include "shapereg/preproc.hpp"

#include <cmath>
#include <algorithm>

#include <Eigen/Dense>

#include "shapereg/common.hpp"
#include "shapereg/simd/kernels.hpp"

namespace shapereg {

GrayImage amss_smooth(const GrayImage& img, double scale, double time_step) {
  validate(img);
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("amss scale must be finite and non-negative");
  }
  if (!(time_step > 0.0)) throw std::invalid_argument("amss time step must be positive");
  if (scale == 0.0) return img;

  const int steps = static_cast<int>(std::ceil(scale / time_step - 1e-9));
  const double dt = scale / steps;
  const int w = img.width(), h = img.height();
  const std::size_t stride = static_cast<std::size_t>(w) + 2;

  std::vector<double> padded(stride * (h + 2));
  GrayImage current = img;
  GrayImage next(w, h);
  const auto& kernels = simd::active();

  for (int s = 0; s < steps; ++s) {
    for (int y = -1; y <= h; ++y) {
      const int sy = std::clamp(y, 0, h - 1);
      double* dst = padded.data() + static_cast<std::size_t>(y + 1) * stride;
      const auto src = current.row(sy);
      std::copy(src.begin(), src.end(), dst + 1);
      dst[0] = src.front();
      dst[w + 1] = src.back();
    }
    for (int y = 0; y < h; ++y) {
      const double* mid = padded.data() + static_cast<std::size_t>(y + 1) * stride + 1;
      kernels.amss_row(mid - stride, mid, mid + stride,
                       next.values().data() + static_cast<std::size_t>(y) * w, w, dt);
    }
    std::swap(current, next);
  }
  return current;
}

double legendre(int k, double t) {
  if (k == 0) return 1.0;
  double prev = 1.0, cur = t;
  for (int n = 1; n < k; ++n) {
    const double nxt = ((2.0 * n + 1.0) * t * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = nxt;
  }
  return cur;
}

namespace {

double normalized_coord(int i, int extent) {
  return extent > 1 ? 2.0 * i / (extent - 1) - 1.0 : 0.0;
}

std::vector<double> legendre_table(int degree, int extent) {
  std::vector<double> table(static_cast<std::size_t>(degree + 1) * extent);
  for (int i = 0; i < extent; ++i) {
    const double t = normalized_coord(i, extent);
    for (int k = 0; k <= degree; ++k) table[static_cast<std::size_t>(i) * (degree + 1) + k] = legendre(k, t);
  }
  return table;
}

}  // namespace

double BiasModel::evaluate_normalized(double xn, double yn) const {
  double acc = 0.0;
  for (int i = 0; i <= degree_m; ++i) {
    const double px = legendre(i, xn);
    for (int j = 0; j <= degree_n; ++j) {
      acc += coefficients[static_cast<std::size_t>(i) * (degree_n + 1) + j] * px * legendre(j, yn);
    }
  }
  return acc;
}

GrayImage BiasModel::surface(int width, int height) const {
  const auto px = legendre_table(degree_m, width);
  const auto py = legendre_table(degree_n, height);
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = 0; i <= degree_m; ++i) {
        const double fx = px[static_cast<std::size_t>(x) * (degree_m + 1) + i];
        for (int j = 0; j <= degree_n; ++j) {
          acc += coefficients[static_cast<std::size_t>(i) * (degree_n + 1) + j] * fx *
                 py[static_cast<std::size_t>(y) * (degree_n + 1) + j];
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

BiasModel fit_bias(const GrayImage& img, int degree_m, int degree_n) {
  validate(img);
  if (degree_m < 0 || degree_n < 0) throw std::invalid_argument("bias degrees must be non-negative");
  const int w = img.width(), h = img.height();
  const Eigen::Index cols = static_cast<Eigen::Index>(degree_m + 1) * (degree_n + 1);
  const Eigen::Index rows = static_cast<Eigen::Index>(w) * h;
  if (cols >= rows) {
    throw Error(ErrorCode::DegenerateFit, "more bias coefficients than pixels");
  }

  const auto px = legendre_table(degree_m, w);
  const auto py = legendre_table(degree_n, h);
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Index k = static_cast<Eigen::Index>(y) * w + x;
      for (int i = 0; i <= degree_m; ++i) {
        for (int j = 0; j <= degree_n; ++j) {
          design(k, i * (degree_n + 1) + j) = px[static_cast<std::size_t>(x) * (degree_m + 1) + i] *
                                              py[static_cast<std::size_t>(y) * (degree_n + 1) + j];
        }
      }
      rhs(k) = img.at(x, y);
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    throw Error(ErrorCode::DegenerateFit, "bias design matrix is rank deficient (rank " +
                                              std::to_string(qr.rank()) + " < " +
                                              std::to_string(cols) + ")");
  }
  const Eigen::VectorXd c = qr.solve(rhs);
  BiasModel model{degree_m, degree_n, std::vector<double>(c.data(), c.data() + c.size())};
  return model;
}

GrayImage correct_bias(const GrayImage& img, const BiasModel& model) {
  validate(img);
  if (model.coefficients.size() !=
      static_cast<std::size_t>(model.degree_m + 1) * (model.degree_n + 1)) {
    throw std::invalid_argument("bias model coefficient count does not match its degrees");
  }
  const GrayImage surf = model.surface(img.width(), img.height());
  for (double v : surf.values()) {
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveBias, "bias surface is not strictly positive");
  }
  const double surf_mean = surf.mean();
  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out.values()[i] = img.values()[i] * surf_mean / surf.values()[i];
  }
  const double target = img.mean();
  const double got = out.mean();
  if (got != 0.0) {
    const double k = target / got;
    for (double& v : out.values()) v *= k;
  }
  return out;
}

}  // namespace shapereg
