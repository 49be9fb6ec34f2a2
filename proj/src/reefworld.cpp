#include "reefsim/reefworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "reefsim/simd/kernels.hpp"

namespace reefsim::reefworld {

std::string_view to_string(SubstrateClass c) {
  return c == SubstrateClass::Suitable ? "suitable" : "unsuitable";
}

SubstrateClass substrate_from_string(std::string_view s) {
  if (s == "suitable") return SubstrateClass::Suitable;
  if (s == "unsuitable") return SubstrateClass::Unsuitable;
  throw Error(Errc::Decode, "unknown substrate class '" + std::string(s) + "'");
}

Rect GridGeometry::bounds() const {
  return {origin, {origin.x + cell_size * static_cast<double>(width_cells),
                   origin.y + cell_size * static_cast<double>(height_cells)}};
}

std::optional<std::size_t> GridGeometry::cell_index(Vec2 p) const {
  const double fx = std::floor((p.x - origin.x) / cell_size);
  const double fy = std::floor((p.y - origin.y) / cell_size);
  if (!(fx >= 0.0 && fy >= 0.0)) return std::nullopt;
  if (fx >= static_cast<double>(width_cells) || fy >= static_cast<double>(height_cells))
    return std::nullopt;
  return static_cast<std::size_t>(fy) * width_cells + static_cast<std::size_t>(fx);
}

Vec2 GridGeometry::cell_center(std::size_t ix, std::size_t iy) const {
  return {origin.x + (static_cast<double>(ix) + 0.5) * cell_size,
          origin.y + (static_cast<double>(iy) + 0.5) * cell_size};
}

BenthicMap::BenthicMap(GridGeometry grid, std::vector<SubstrateClass> cells, std::uint64_t seed)
    : grid_(grid), cells_(std::move(cells)), seed_(seed) {
  if (grid_.width_cells == 0 || grid_.height_cells == 0)
    throw Error(Errc::InvalidParameter, "map dimensions must be at least 1x1");
  if (!(grid_.cell_size > 0.0) || !std::isfinite(grid_.cell_size))
    throw Error(Errc::InvalidParameter, "cell_size must be positive");
  if (cells_.size() != grid_.cell_count())
    throw Error(Errc::InvalidParameter, "cell array length does not match dimensions");
}

std::size_t BenthicMap::suitable_count() const {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(cells_.data());
  return simd::active_kernels().count_u8(bytes, cells_.size(),
                                         static_cast<std::uint8_t>(SubstrateClass::Suitable));
}

double BenthicMap::suitable_fraction() const {
  return static_cast<double>(suitable_count()) / static_cast<double>(cells_.size());
}

namespace {

constexpr int kNoiseBits = 12;
constexpr std::size_t kMaxRadius = 64;

std::size_t smoothing_radius(double clustering, std::size_t w, std::size_t h) {
  const std::size_t short_side = std::min(w, h);
  const auto r = static_cast<std::size_t>(
      std::lround(clustering * clustering * static_cast<double>(short_side) / 8.0));
  // Window must not wrap onto itself.
  return std::min({r, kMaxRadius, (short_side - 1) / 2});
}

// Toroidal box sum of half-width `r` along rows, then along columns.
std::vector<std::int32_t> box_smooth(const std::vector<std::int32_t>& noise, std::size_t w,
                                     std::size_t h, std::size_t r) {
  if (r == 0) return noise;
  const auto wrap = [](std::ptrdiff_t i, std::size_t n) {
    const auto m = static_cast<std::ptrdiff_t>(n);
    return static_cast<std::size_t>(((i % m) + m) % m);
  };
  const auto sr = static_cast<std::ptrdiff_t>(r);

  std::vector<std::int32_t> rows(noise.size());
  for (std::size_t y = 0; y < h; ++y) {
    const std::int32_t* in = noise.data() + y * w;
    std::int32_t* out = rows.data() + y * w;
    std::int32_t acc = 0;
    for (std::ptrdiff_t d = -sr; d <= sr; ++d) acc += in[wrap(d, w)];
    for (std::size_t x = 0; x < w; ++x) {
      out[x] = acc;
      const auto xi = static_cast<std::ptrdiff_t>(x);
      acc += in[wrap(xi + sr + 1, w)] - in[wrap(xi - sr, w)];
    }
  }

  const auto& kernels = simd::active_kernels();
  std::vector<std::int32_t> out(noise.size());
  std::vector<std::int32_t> acc(w, 0);
  for (std::ptrdiff_t d = -sr; d <= sr; ++d) {
    const std::int32_t* row = rows.data() + wrap(d, h) * w;
    for (std::size_t x = 0; x < w; ++x) acc[x] += row[x];
  }
  for (std::size_t y = 0; y < h; ++y) {
    std::copy(acc.begin(), acc.end(), out.begin() + static_cast<std::ptrdiff_t>(y * w));
    const auto yi = static_cast<std::ptrdiff_t>(y);
    kernels.slide_window_i32(acc.data(), rows.data() + wrap(yi + sr + 1, h) * w,
                             rows.data() + wrap(yi - sr, h) * w, w);
  }
  return out;
}

}  // namespace

BenthicMap generate_reef(std::uint64_t seed, std::size_t width_cells, std::size_t height_cells,
                         double cell_size, double target_suitable_fraction, double clustering,
                         Vec2 origin) {
  if (width_cells == 0 || height_cells == 0)
    throw Error(Errc::InvalidParameter, "map dimensions must be at least 1x1");
  if (!(target_suitable_fraction >= 0.0 && target_suitable_fraction <= 1.0))
    throw Error(Errc::InvalidParameter, "target_suitable_fraction must be in [0,1]");
  if (!(clustering >= 0.0 && clustering <= 1.0))
    throw Error(Errc::InvalidParameter, "clustering must be in [0,1]");
  if (!(cell_size > 0.0)) throw Error(Errc::InvalidParameter, "cell_size must be positive");

  const std::size_t n = width_cells * height_cells;
  std::mt19937_64 rng(seed);
  std::vector<std::int32_t> noise(n);
  for (auto& v : noise) v = static_cast<std::int32_t>(rng() >> (64 - kNoiseBits));

  const auto field =
      box_smooth(noise, width_cells, height_cells, smoothing_radius(clustering, width_cells, height_cells));

  // Highest field values become suitable; ties go to the lower index.
  const auto k = static_cast<std::size_t>(std::llround(target_suitable_fraction * static_cast<double>(n)));
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const auto ranks_before = [&](std::uint32_t a, std::uint32_t b) {
    return field[a] != field[b] ? field[a] > field[b] : a < b;
  };
  if (k > 0 && k < n)
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                     ranks_before);

  std::vector<SubstrateClass> cells(n, SubstrateClass::Unsuitable);
  for (std::size_t i = 0; i < k; ++i) cells[order[i]] = SubstrateClass::Suitable;

  return BenthicMap({width_cells, height_cells, cell_size, origin}, std::move(cells), seed);
}

SubstrateClass sample_substrate(const BenthicMap& map, Vec2 position) {
  const auto idx = map.grid().cell_index(position);
  if (!idx) {
    std::ostringstream msg;
    msg << "position (" << position.x << ", " << position.y << ") is outside the map";
    throw Error(Errc::OutOfBounds, msg.str());
  }
  return map.cells()[*idx];
}

WindField::WindField(Vec2 velocity_, double gust_amplitude_, double gust_period_)
    : velocity(velocity_), gust_amplitude(gust_amplitude_), gust_period(gust_period_) {
  if (!(gust_amplitude >= 0.0)) throw Error(Errc::InvalidParameter, "gust_amplitude must be >= 0");
  if (!(gust_period > 0.0)) throw Error(Errc::InvalidParameter, "gust_period must be > 0");
}

Vec2 wind_drift(const WindField& wind, double t) {
  const double speed = norm(wind.velocity);
  if (speed == 0.0) return {};
  const double gust = wind.gust_amplitude * std::sin(2.0 * std::numbers::pi * t / wind.gust_period);
  return wind.velocity + (gust / speed) * wind.velocity;
}

// --- text format ----------------------------------------------------------

namespace {

char class_letter(SubstrateClass c) { return c == SubstrateClass::Suitable ? 'S' : 'U'; }

std::string encode_row(std::span<const SubstrateClass> row) {
  std::string out;
  std::size_t i = 0;
  while (i < row.size()) {
    std::size_t j = i;
    while (j < row.size() && row[j] == row[i]) ++j;
    out += std::to_string(j - i);
    out += class_letter(row[i]);
    i = j;
  }
  return out;
}

void decode_row(const std::string& line, std::size_t width, std::vector<SubstrateClass>& out) {
  std::size_t produced = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    std::size_t run = 0;
    const std::size_t digits_start = i;
    while (i < line.size() && line[i] >= '0' && line[i] <= '9') {
      run = run * 10 + static_cast<std::size_t>(line[i] - '0');
      if (run > width) throw Error(Errc::Decode, "run length exceeds row width");
      ++i;
    }
    if (i == digits_start || i == line.size() || run == 0)
      throw Error(Errc::Decode, "malformed run in row '" + line + "'");
    SubstrateClass c;
    if (line[i] == 'S')
      c = SubstrateClass::Suitable;
    else if (line[i] == 'U')
      c = SubstrateClass::Unsuitable;
    else
      throw Error(Errc::Decode, std::string("unknown class letter '") + line[i] + "'");
    ++i;
    produced += run;
    if (produced > width) throw Error(Errc::Decode, "row longer than map width");
    out.insert(out.end(), run, c);
  }
  if (produced != width) throw Error(Errc::Decode, "row shorter than map width");
}

template <typename T>
T expect_field(std::istream& in, const char* key) {
  std::string word;
  T value{};
  if (!(in >> word) || word != key || !(in >> value))
    throw Error(Errc::Decode, std::string("expected field '") + key + "'");
  return value;
}

}  // namespace

void write_map(std::ostream& out, const BenthicMap& map) {
  const auto& g = map.grid();
  std::ostringstream header;
  header.precision(17);
  header << "reefmap 1\n"
         << "width " << g.width_cells << "\n"
         << "height " << g.height_cells << "\n"
         << "cell_size " << g.cell_size << "\n"
         << "origin " << g.origin.x << " " << g.origin.y << "\n"
         << "seed " << map.seed() << "\n"
         << "cells\n";
  out << header.str();
  for (std::size_t y = 0; y < g.height_cells; ++y)
    out << encode_row(map.cells().subspan(y * g.width_cells, g.width_cells)) << "\n";
}

BenthicMap read_map(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "reefmap" || version != 1)
    throw Error(Errc::Decode, "not a reefmap v1 file");
  GridGeometry g;
  g.width_cells = expect_field<std::size_t>(in, "width");
  g.height_cells = expect_field<std::size_t>(in, "height");
  g.cell_size = expect_field<double>(in, "cell_size");
  g.origin.x = expect_field<double>(in, "origin");
  if (!(in >> g.origin.y)) throw Error(Errc::Decode, "origin needs two coordinates");
  const auto seed = expect_field<std::uint64_t>(in, "seed");
  std::string word;
  if (!(in >> word) || word != "cells") throw Error(Errc::Decode, "expected 'cells'");
  if (g.width_cells == 0 || g.height_cells == 0)
    throw Error(Errc::InvalidParameter, "map dimensions must be at least 1x1");

  std::vector<SubstrateClass> cells;
  cells.reserve(g.cell_count());
  std::string line;
  std::getline(in, line);
  for (std::size_t y = 0; y < g.height_cells; ++y) {
    if (!std::getline(in, line)) throw Error(Errc::Decode, "missing map rows");
    decode_row(line, g.width_cells, cells);
  }
  return BenthicMap(g, std::move(cells), seed);
}

void save_map(const std::string& path, const BenthicMap& map) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write map file " + path);
  write_map(out, map);
}

BenthicMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open map file " + path);
  return read_map(in);
}

}  // namespace reefsim::reefworld
