#pragma once
// Synthetic benthic substrate maps and the wind disturbance field.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reefsim/common.hpp"

namespace reefsim::reefworld {

enum class SubstrateClass : std::uint8_t { Suitable = 0, Unsuitable = 1 };

std::string_view to_string(SubstrateClass c);
SubstrateClass substrate_from_string(std::string_view s);

/// Cell lattice of a map without its contents. Cells are half-open:
/// cell (ix, iy) covers [origin.x + ix*size, origin.x + (ix+1)*size) along x
/// and likewise along y.
struct GridGeometry {
  std::size_t width_cells = 0;
  std::size_t height_cells = 0;
  double cell_size = 1.0;
  Vec2 origin;

  std::size_t cell_count() const { return width_cells * height_cells; }
  double cell_area() const { return cell_size * cell_size; }
  Rect bounds() const;

  /// Flat row-major index of the cell containing `p`, or nullopt outside.
  std::optional<std::size_t> cell_index(Vec2 p) const;
  Vec2 cell_center(std::size_t ix, std::size_t iy) const;
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

class BenthicMap {
 public:
  BenthicMap(GridGeometry grid, std::vector<SubstrateClass> cells, std::uint64_t seed);

  const GridGeometry& grid() const { return grid_; }
  std::size_t width_cells() const { return grid_.width_cells; }
  std::size_t height_cells() const { return grid_.height_cells; }
  double cell_size() const { return grid_.cell_size; }
  Vec2 origin() const { return grid_.origin; }
  std::uint64_t seed() const { return seed_; }
  std::span<const SubstrateClass> cells() const { return cells_; }

  SubstrateClass at(std::size_t ix, std::size_t iy) const { return cells_[iy * grid_.width_cells + ix]; }
  std::size_t suitable_count() const;
  double suitable_fraction() const;

  friend bool operator==(const BenthicMap&, const BenthicMap&) = default;

 private:
  GridGeometry grid_;
  std::vector<SubstrateClass> cells_;
  std::uint64_t seed_;
};

/// Threshold-of-smoothed-noise reef. `clustering` 0 gives independent cells;
/// values toward 1 widen the smoothing window and so the patch size. The
/// suitable cell count is exactly round(target_suitable_fraction * cells).
BenthicMap generate_reef(std::uint64_t seed, std::size_t width_cells, std::size_t height_cells,
                         double cell_size, double target_suitable_fraction, double clustering,
                         Vec2 origin = {});

/// Throws Errc::OutOfBounds outside the map.
SubstrateClass sample_substrate(const BenthicMap& map, Vec2 position);

struct WindField {
  Vec2 velocity;
  double gust_amplitude = 0.0;
  double gust_period = 60.0;

  WindField() = default;
  WindField(Vec2 velocity, double gust_amplitude, double gust_period);
};

/// velocity + amplitude * sin(2 pi t / period) * unit(velocity).
Vec2 wind_drift(const WindField& wind, double t);

// Text map format:
//   reefmap 1
//   width <n>
//   height <n>
//   cell_size <m>
//   origin <x> <y>
//   seed <n>
//   cells
//   <one run-length-encoded row per line, row 0 first, e.g. 12S3U85S>
void write_map(std::ostream& out, const BenthicMap& map);
BenthicMap read_map(std::istream& in);
void save_map(const std::string& path, const BenthicMap& map);
BenthicMap load_map(const std::string& path);

}  // namespace reefsim::reefworld
