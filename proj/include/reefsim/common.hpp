#pragma once
// Shared geometry and error types for the reef dispersal simulator.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reefsim {

/// Largest fleet the console and fleet service manage at once.
inline constexpr int kMaxFleetSize = 7;

enum class Errc {
  InvalidParameter,
  OutOfBounds,
  InvalidState,
  UndefinedEndurance,
  FleetSize,
  FleetCapacity,
  UnknownVehicle,
  Dispatch,
  Encoding,
  Decode,
  Configuration,
  EmptyLog,
  DataIntegrity,
  Timeout,
  Io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the `Errc` codes so
/// callers (CLI, fleet service) can map it to an exit status or a reply.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  return a;
}

/// Axis-aligned rectangle in world meters.
struct Rect {
  Vec2 min;
  Vec2 max;

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double area() const { return width() * height(); }
};

}  // namespace reefsim
