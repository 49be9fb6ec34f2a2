#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "doctest.h"
#include "reefsim/simd/kernels.hpp"

using namespace reefsim::simd;

namespace {

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const auto* avx = avx2_kernels()) out.push_back(avx);
  return out;
}

std::vector<double> random_doubles(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("active kernel table is one of the built variants") {
  const auto& k = active_kernels();
  const bool known = &k == &scalar_kernels() || &k == avx2_kernels();
  CHECK(known);
  MESSAGE("active kernels: " << k.name);
}

TEST_CASE("scalar kernels against naive loops") {
  const auto& k = scalar_kernels();
  std::mt19937_64 rng(11);

  std::vector<std::int32_t> acc(37), add(37), sub(37);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] = static_cast<std::int32_t>(rng() % 1000);
    add[i] = static_cast<std::int32_t>(rng() % 4096);
    sub[i] = static_cast<std::int32_t>(rng() % 4096);
  }
  auto expect = acc;
  for (std::size_t i = 0; i < acc.size(); ++i) expect[i] += add[i] - sub[i];
  k.slide_window_i32(acc.data(), add.data(), sub.data(), acc.size());
  CHECK(acc == expect);

  std::vector<std::uint8_t> bytes(1001);
  std::size_t ones = 0;
  for (auto& b : bytes) {
    b = static_cast<std::uint8_t>(rng() & 1);
    ones += b;
  }
  CHECK(k.count_u8(bytes.data(), bytes.size(), 1) == ones);
  CHECK(k.count_u8(bytes.data(), bytes.size(), 0) == bytes.size() - ones);
  CHECK(k.count_u8(bytes.data(), 0, 0) == 0);

  const double xs[] = {3.0, 5.0, 0.0};
  const double ys[] = {0.0, 2.0, 0.0};
  double out[3];
  // segment (0,0)->(3,4)
  k.signed_distance_f64(xs, ys, 3, 0.0, 0.0, 3.0, 4.0, 0.2, out);
  CHECK(out[0] == doctest::Approx(-2.4));
  CHECK(out[2] == 0.0);

  const double vals[] = {0.5, -3.25, 2.0};
  CHECK(k.max_abs_f64(vals, 3) == 3.25);
  CHECK(k.max_abs_f64(vals, 0) == 0.0);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  const auto* avx = avx2_kernels();
  if (!avx) {
    MESSAGE("AVX2 unavailable on this host; equivalence skipped");
    return;
  }
  const auto& sc = scalar_kernels();
  std::mt19937_64 rng(2024);
  for (std::size_t n : {0u, 1u, 3u, 7u, 8u, 9u, 31u, 32u, 33u, 255u, 1000u, 4099u}) {
    CAPTURE(n);
    std::vector<std::int32_t> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<std::int32_t>(rng() % 2000000) - 1000000;
      b[i] = static_cast<std::int32_t>(rng() % 4096);
      c[i] = static_cast<std::int32_t>(rng() % 4096);
    }
    auto a2 = a;
    sc.slide_window_i32(a.data(), b.data(), c.data(), n);
    avx->slide_window_i32(a2.data(), b.data(), c.data(), n);
    CHECK(a == a2);

    std::vector<std::uint8_t> bytes(n);
    for (auto& x : bytes) x = static_cast<std::uint8_t>(rng() % 3);
    for (std::uint8_t v = 0; v < 3; ++v) CHECK(sc.count_u8(bytes.data(), n, v) == avx->count_u8(bytes.data(), n, v));

    const auto xs = random_doubles(rng, n, 500.0);
    const auto ys = random_doubles(rng, n, 500.0);
    std::vector<double> o1(n), o2(n);
    const double dx = 17.25, dy = -4.5, inv = 1.0 / std::hypot(dx, dy);
    sc.signed_distance_f64(xs.data(), ys.data(), n, 1.5, -2.0, dx, dy, inv, o1.data());
    avx->signed_distance_f64(xs.data(), ys.data(), n, 1.5, -2.0, dx, dy, inv, o2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == o2[i]);

    CHECK(sc.max_abs_f64(xs.data(), n) == avx->max_abs_f64(xs.data(), n));
  }
}
