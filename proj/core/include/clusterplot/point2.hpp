#pragma once

#include <cmath>

namespace clusterplot {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) noexcept { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) noexcept { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double squared_distance(Point2 a, Point2 b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}
inline double distance(Point2 a, Point2 b) noexcept { return std::sqrt(squared_distance(a, b)); }

}  // namespace clusterplot
