// Compiled with -mavx2 only; callers reach these through the runtime table.
#include <immintrin.h>

#include <cstdint>
#include <initializer_list>

#include "shapereg/simd/kernels.hpp"

namespace shapereg::simd::avx2 {

namespace {

// Signed cube root. Initial guess from the exponent bits (high word / 3 plus
// the usual bias constant), then four Newton steps: ~5 bits -> full precision.
inline __m256d cbrt_pd(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d sign = _mm256_and_pd(x, sign_mask);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);

  const __m256i bits = _mm256_castpd_si256(ax);
  const __m256i hi = _mm256_srli_epi64(bits, 32);
  // floor(hi / 3) for 32-bit hi: (hi * 0xAAAAAAAB) >> 33.
  const __m256i third = _mm256_srli_epi64(_mm256_mul_epu32(hi, _mm256_set1_epi64x(0xAAAAAAABLL)), 33);
  const __m256i guess_hi = _mm256_add_epi64(third, _mm256_set1_epi64x(0x2A9F7893LL));
  __m256d y = _mm256_castsi256_pd(_mm256_slli_epi64(guess_hi, 32));

  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d one_third = _mm256_set1_pd(1.0 / 3.0);
  for (int k = 0; k < 4; ++k) {
    const __m256d y2 = _mm256_mul_pd(y, y);
    y = _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(two, y), _mm256_div_pd(ax, y2)), one_third);
  }
  const __m256d tiny = _mm256_cmp_pd(ax, _mm256_set1_pd(1e-290), _CMP_LT_OQ);
  y = _mm256_andnot_pd(tiny, y);
  return _mm256_or_pd(y, sign);
}

inline __m256d load(const double* p) { return _mm256_loadu_pd(p); }

}  // namespace

void amss_row(const double* up, const double* mid, const double* down, double* out,
              std::size_t width, double dt) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d quarter = _mm256_set1_pd(0.25);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d vdt = _mm256_set1_pd(dt);

  std::size_t i = 0;
  for (; i + 4 <= width; i += 4) {
    const __m256d c = load(mid + i);
    const __m256d l = load(mid + i - 1), r = load(mid + i + 1);
    const __m256d t = load(up + i), b = load(down + i);
    const __m256d tl = load(up + i - 1), tr = load(up + i + 1);
    const __m256d bl = load(down + i - 1), br = load(down + i + 1);

    const __m256d ux = _mm256_mul_pd(_mm256_sub_pd(r, l), half);
    const __m256d uy = _mm256_mul_pd(_mm256_sub_pd(b, t), half);
    const __m256d uxx = _mm256_add_pd(_mm256_sub_pd(r, _mm256_mul_pd(two, c)), l);
    const __m256d uyy = _mm256_add_pd(_mm256_sub_pd(b, _mm256_mul_pd(two, c)), t);
    const __m256d uxy = _mm256_mul_pd(
        _mm256_add_pd(_mm256_sub_pd(_mm256_sub_pd(br, bl), tr), tl), quarter);

    const __m256d term1 = _mm256_mul_pd(uxx, _mm256_mul_pd(uy, uy));
    const __m256d term2 = _mm256_mul_pd(_mm256_mul_pd(two, uxy), _mm256_mul_pd(ux, uy));
    const __m256d term3 = _mm256_mul_pd(uyy, _mm256_mul_pd(ux, ux));
    const __m256d num = _mm256_add_pd(_mm256_sub_pd(term1, term2), term3);
    __m256d v = _mm256_add_pd(c, _mm256_mul_pd(vdt, cbrt_pd(num)));

    __m256d lo = _mm256_min_pd(c, l), hi = _mm256_max_pd(c, l);
    for (const __m256d& n : {r, t, b, tl, tr, bl, br}) {
      lo = _mm256_min_pd(lo, n);
      hi = _mm256_max_pd(hi, n);
    }
    v = _mm256_min_pd(_mm256_max_pd(v, lo), hi);
    _mm256_storeu_pd(out + i, v);
  }
  if (i < width) scalar::amss_row(up + i, mid + i, down + i, out + i, width - i, dt);
}

void distance_row(double px, double py, const double* q, double* out, std::size_t n) {
  const __m256d p = _mm256_setr_pd(px, py, px, py);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d a = _mm256_sub_pd(p, _mm256_loadu_pd(q + 2 * j));      // q0 q1
    const __m256d b = _mm256_sub_pd(p, _mm256_loadu_pd(q + 2 * j + 4));  // q2 q3
    // hadd gives (d0, d2, d1, d3); restore point order.
    const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    const __m256d d = _mm256_permute4x64_pd(s, 0b11011000);
    _mm256_storeu_pd(out + j, _mm256_sqrt_pd(d));
  }
  if (j < n) scalar::distance_row(px, py, q + 2 * j, out + j, n - j);
}

void project_points(const double* h, const double* in, double* out, double* w, std::size_t n) {
  const __m256d h0 = _mm256_set1_pd(h[0]), h1 = _mm256_set1_pd(h[1]), h2 = _mm256_set1_pd(h[2]);
  const __m256d h3 = _mm256_set1_pd(h[3]), h4 = _mm256_set1_pd(h[4]), h5 = _mm256_set1_pd(h[5]);
  const __m256d h6 = _mm256_set1_pd(h[6]), h7 = _mm256_set1_pd(h[7]), h8 = _mm256_set1_pd(h[8]);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d a = _mm256_loadu_pd(in + 2 * j);
    const __m256d b = _mm256_loadu_pd(in + 2 * j + 4);
    // Lanes come out in point order 0 2 1 3.
    const __m256d x = _mm256_unpacklo_pd(a, b);
    const __m256d y = _mm256_unpackhi_pd(a, b);
    const __m256d X = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(h0, x), _mm256_mul_pd(h1, y)), h2);
    const __m256d Y = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(h3, x), _mm256_mul_pd(h4, y)), h5);
    const __m256d W = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(h6, x), _mm256_mul_pd(h7, y)), h8);
    const __m256d px = _mm256_div_pd(X, W);
    const __m256d py = _mm256_div_pd(Y, W);
    _mm256_storeu_pd(out + 2 * j, _mm256_unpacklo_pd(px, py));
    _mm256_storeu_pd(out + 2 * j + 4, _mm256_unpackhi_pd(px, py));
    _mm256_storeu_pd(w + j, _mm256_permute4x64_pd(W, 0b11011000));
  }
  if (j < n) scalar::project_points(h, in + 2 * j, out + 2 * j, w + j, n - j);
}

}  // namespace shapereg::simd::avx2
