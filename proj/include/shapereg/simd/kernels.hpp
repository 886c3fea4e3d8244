#pragma once

#include <cstddef>

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// where the CPU allows it, a vectorized twin chosen once at runtime. The
// SHAPEREG_SIMD environment variable ("scalar" or "avx2") overrides the pick.

namespace shapereg::simd {

enum class Backend { Scalar, Avx2 };

// One explicit affine-curvature-motion update over `width` pixels.
// `up`, `mid`, `down` point at the first real pixel of three rows that are
// padded by one replicated pixel on each side, so index -1 and `width` are
// readable. Writes the clamped update into out[0 .. width).
using AmssRowFn = void (*)(const double* up, const double* mid, const double* down,
                           double* out, std::size_t width, double dt);

// out[j] = |p - q_j|, q interleaved as x0 y0 x1 y1 ...
using DistanceRowFn = void (*)(double px, double py, const double* q, double* out,
                               std::size_t n);

// Applies the row-major 3x3 homography `h` to n interleaved points; writes the
// dehomogenized points (interleaved) and the homogeneous weights.
using ProjectFn = void (*)(const double* h, const double* in, double* out, double* w,
                           std::size_t n);

struct KernelTable {
  Backend backend;
  AmssRowFn amss_row;
  DistanceRowFn distance_row;
  ProjectFn project_points;
};

const char* name(Backend backend);
bool available(Backend backend);

// Table for an explicit backend; throws std::invalid_argument when the CPU
// (or the build) cannot run it.
const KernelTable& table(Backend backend);

// Table picked at first use: the env override if set, else the widest
// available backend.
const KernelTable& active();

// Switches the active table (used by tests and benchmarks).
void set_active(Backend backend);

namespace scalar {
void amss_row(const double* up, const double* mid, const double* down, double* out,
              std::size_t width, double dt);
void distance_row(double px, double py, const double* q, double* out, std::size_t n);
void project_points(const double* h, const double* in, double* out, double* w, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SHAPEREG_HAVE_AVX2_KERNELS 1
namespace avx2 {
void amss_row(const double* up, const double* mid, const double* down, double* out,
              std::size_t width, double dt);
void distance_row(double px, double py, const double* q, double* out, std::size_t n);
void project_points(const double* h, const double* in, double* out, double* w, std::size_t n);
}  // namespace avx2
#endif

}  // namespace shapereg::simd
