#pragma once
// Data-parallel inner loops used by map generation, map statistics and
// batch guidance checks. Each kernel has a scalar reference and an AVX2
// variant; the variants are bit-identical so dispatch never changes results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace reefsim::simd {

struct KernelTable {
  std::string_view name;

  // acc[i] += add[i] - sub[i]
  void (*slide_window_i32)(std::int32_t* acc, const std::int32_t* add, const std::int32_t* sub,
                           std::size_t n);

  // Number of bytes equal to `value`.
  std::size_t (*count_u8)(const std::uint8_t* data, std::size_t n, std::uint8_t value);

  // out[i] = cross(dir, p_i - origin) * inv_len, i.e. signed distance of each
  // point to the line through `origin` along `dir` (positive on the left).
  void (*signed_distance_f64)(const double* xs, const double* ys, std::size_t n, double origin_x,
                              double origin_y, double dir_x, double dir_y, double inv_len,
                              double* out);

  // max_i |values[i]|, 0 for n == 0.
  double (*max_abs_f64)(const double* values, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();

/// Kernel table selected once at startup: AVX2 when the CPU supports it,
/// scalar otherwise. `REEFSIM_SIMD=scalar` in the environment forces the
/// scalar path.
const KernelTable& active_kernels();

}  // namespace reefsim::simd
