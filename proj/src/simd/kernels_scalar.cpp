#include "reefsim/simd/kernels.hpp"

#include <cmath>

namespace reefsim::simd {
namespace {

void slide_window_i32(std::int32_t* acc, const std::int32_t* add, const std::int32_t* sub,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += add[i] - sub[i];
}

std::size_t count_u8(const std::uint8_t* data, std::size_t n, std::uint8_t value) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += data[i] == value ? 1 : 0;
  return count;
}

void signed_distance_f64(const double* xs, const double* ys, std::size_t n, double origin_x,
                         double origin_y, double dir_x, double dir_y, double inv_len,
                         double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - origin_x;
    const double dy = ys[i] - origin_y;
    const double lhs = dir_x * dy;
    const double rhs = dir_y * dx;
    out[i] = (lhs - rhs) * inv_len;
  }
}

double max_abs_f64(const double* values, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(values[i]);
    if (a > best) best = a;
  }
  return best;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", slide_window_i32, count_u8, signed_distance_f64,
                                 max_abs_f64};
  return table;
}

}  // namespace reefsim::simd
