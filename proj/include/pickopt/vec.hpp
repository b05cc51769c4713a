#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pickopt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }

  // Counter-clockwise rotation.
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }

  bool operator==(const Vec2&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }

  Vec3 normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n};
  }

  Vec2 xy() const { return {x, y}; }

  bool operator==(const Vec3&) const = default;
};

// Axis-aligned rectangle in the conveyor plane.
struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(double x, double y) const {
    return x >= xmin && x < xmax && y >= ymin && y < ymax;
  }
  bool operator==(const Rect&) const = default;
};

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
  const double pi = std::numbers::pi;
  while (a > pi) a -= 2.0 * pi;
  while (a <= -pi) a += 2.0 * pi;
  return a;
}

// Angle of a unit vector from the +z axis, in [0, pi].
inline double tilt_from_vertical(const Vec3& n) {
  const double c = std::clamp(n.z / n.norm(), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace pickopt
