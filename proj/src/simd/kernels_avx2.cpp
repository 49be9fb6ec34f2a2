// Compiled with -mavx2 only; callers reach it through active_kernels() after
// a runtime CPU check.
#include "reefsim/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace reefsim::simd {
namespace {

void slide_window_i32(std::int32_t* acc, const std::int32_t* add, const std::int32_t* sub,
                      std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    const __m256i p = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(add + i));
    const __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(sub + i));
    a = _mm256_add_epi32(a, _mm256_sub_epi32(p, m));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(acc + i), a);
  }
  for (; i < n; ++i) acc[i] += add[i] - sub[i];
}

std::size_t count_u8(const std::uint8_t* data, std::size_t n, std::uint8_t value) {
  const __m256i needle = _mm256_set1_epi8(static_cast<char>(value));
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(data + i));
    const auto mask = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, needle)));
    count += static_cast<std::size_t>(__builtin_popcount(mask));
  }
  for (; i < n; ++i) count += data[i] == value ? 1 : 0;
  return count;
}

void signed_distance_f64(const double* xs, const double* ys, std::size_t n, double origin_x,
                         double origin_y, double dir_x, double dir_y, double inv_len,
                         double* out) {
  const __m256d ox = _mm256_set1_pd(origin_x);
  const __m256d oy = _mm256_set1_pd(origin_y);
  const __m256d ux = _mm256_set1_pd(dir_x);
  const __m256d uy = _mm256_set1_pd(dir_y);
  const __m256d inv = _mm256_set1_pd(inv_len);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), ox);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), oy);
    const __m256d lhs = _mm256_mul_pd(ux, dy);
    const __m256d rhs = _mm256_mul_pd(uy, dx);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(lhs, rhs), inv));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - origin_x;
    const double dy = ys[i] - origin_y;
    const double lhs = dir_x * dy;
    const double rhs = dir_y * dx;
    out[i] = (lhs - rhs) * inv_len;
  }
}

double max_abs_f64(const double* values, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(values + i));
    // NaN in `a` selects `best`, matching the scalar comparison.
    best = _mm256_max_pd(a, best);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double result = 0.0;
  for (double lane : lanes)
    if (lane > result) result = lane;
  for (; i < n; ++i) {
    const double a = std::fabs(values[i]);
    if (a > result) result = a;
  }
  return result;
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", slide_window_i32, count_u8, signed_distance_f64,
                                 max_abs_f64};
  return &table;
}

}  // namespace reefsim::simd
