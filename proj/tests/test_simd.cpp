#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <vector>

#include "shapereg/preproc.hpp"
#include "shapereg/simd/kernels.hpp"

using namespace shapereg;
namespace sk = shapereg::simd;

namespace {

std::vector<sk::Backend> vector_backends() {
  std::vector<sk::Backend> out;
  if (sk::available(sk::Backend::Avx2)) out.push_back(sk::Backend::Avx2);
  return out;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

class ActiveBackendGuard {
 public:
  ActiveBackendGuard() : saved_(sk::active().backend) {}
  ~ActiveBackendGuard() { sk::set_active(saved_); }

 private:
  sk::Backend saved_;
};

}  // namespace

TEST(Simd, ScalarAlwaysAvailable) {
  EXPECT_TRUE(sk::available(sk::Backend::Scalar));
  EXPECT_EQ(sk::table(sk::Backend::Scalar).backend, sk::Backend::Scalar);
}

TEST(Simd, DistanceRowBitIdentical) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-500.0, 500.0);
  for (auto be : vector_backends()) {
    const auto& ref = sk::table(sk::Backend::Scalar);
    const auto& vec = sk::table(be);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 64u, 257u}) {
      std::vector<double> q(2 * n), a(n), b(n);
      for (auto& v : q) v = U(rng);
      const double px = U(rng), py = U(rng);
      ref.distance_row(px, py, q.data(), a.data(), n);
      vec.distance_row(px, py, q.data(), b.data(), n);
      for (std::size_t j = 0; j < n; ++j) ASSERT_TRUE(bit_equal(a[j], b[j])) << sk::name(be) << " n=" << n << " j=" << j;
    }
  }
}

TEST(Simd, ProjectPointsBitIdentical) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (auto be : vector_backends()) {
    const auto& ref = sk::table(sk::Backend::Scalar);
    const auto& vec = sk::table(be);
    for (std::size_t n : {1u, 4u, 7u, 64u, 101u}) {
      double h[9];
      for (double& v : h) v = U(rng);
      h[8] = 3.0;
      std::vector<double> in(2 * n), o1(2 * n), o2(2 * n), w1(n), w2(n);
      for (auto& v : in) v = U(rng);
      ref.project_points(h, in.data(), o1.data(), w1.data(), n);
      vec.project_points(h, in.data(), o2.data(), w2.data(), n);
      for (std::size_t j = 0; j < 2 * n; ++j) ASSERT_TRUE(bit_equal(o1[j], o2[j])) << "j=" << j;
      for (std::size_t j = 0; j < n; ++j) ASSERT_TRUE(bit_equal(w1[j], w2[j])) << "j=" << j;
    }
  }
}

TEST(Simd, AmssRowMatchesScalar) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 255.0);
  for (auto be : vector_backends()) {
    const auto& ref = sk::table(sk::Backend::Scalar);
    const auto& vec = sk::table(be);
    for (std::size_t w : {1u, 2u, 4u, 5u, 9u, 31u, 128u}) {
      std::vector<double> rows(3 * (w + 2));
      for (auto& v : rows) v = U(rng);
      // A few flat patches exercise the zero-curvature path.
      for (std::size_t i = 0; i < std::min<std::size_t>(3, w + 2); ++i) rows[i] = rows[w + 2 + i] = rows[2 * (w + 2) + i] = 7.0;
      std::vector<double> a(w), b(w);
      const double* up = rows.data() + 1;
      const double* mid = up + (w + 2);
      const double* down = mid + (w + 2);
      ref.amss_row(up, mid, down, a.data(), w, 0.05);
      vec.amss_row(up, mid, down, b.data(), w, 0.05);
      for (std::size_t j = 0; j < w; ++j) EXPECT_NEAR(a[j], b[j], 1e-12 * (1.0 + std::abs(a[j]))) << "w=" << w << " j=" << j;
    }
  }
}

TEST(Simd, AmssSmoothImageMatchesScalar) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(0.0, 255.0);
  GrayImage img(37, 29);
  for (double& v : img.values()) v = U(rng);
  ActiveBackendGuard guard;
  sk::set_active(sk::Backend::Scalar);
  const GrayImage ref = amss_smooth(img, 1.0);
  for (auto be : vector_backends()) {
    sk::set_active(be);
    const GrayImage got = amss_smooth(img, 1.0);
    for (std::size_t i = 0; i < img.size(); ++i) ASSERT_NEAR(ref.values()[i], got.values()[i], 1e-9);
  }
}
