#include <algorithm>
#include <cmath>
#include <limits>

#include "clusterplot/geometry.hpp"

namespace clusterplot {

double signed_area(std::span<const Point2> loop) noexcept {
  const std::size_t n = loop.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(loop[i], loop[(i + 1) % n]);
  return 0.5 * s;
}

Box bounding_box(std::span<const Point2> pts) noexcept {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box b{{inf, inf}, {-inf, -inf}};
  for (const auto& p : pts) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

bool inside_loops(Point2 p, std::span<const Polygon> loops) noexcept {
  bool inside = false;
  for (const auto& loop : loops) {
    const std::size_t n = loop.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point2 a = loop[i], b = loop[j];
      if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
  }
  return inside;
}

bool inside_convex(Point2 p, std::span<const Point2> ccw) noexcept {
  const std::size_t n = ccw.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ccw[i], b = ccw[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

double circumradius(Point2 a, Point2 b, Point2 c) noexcept {
  const double area2 = std::abs(cross(b - a, c - a));
  if (area2 == 0.0) return std::numeric_limits<double>::infinity();
  return distance(a, b) * distance(b, c) * distance(c, a) / (2.0 * area2);
}

Polygon convex_hull(std::span<const Point2> pts) {
  std::vector<Point2> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  Polygon hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

Polygon clip_halfplane(std::span<const Point2> poly, Point2 origin, Point2 normal) {
  Polygon out;
  const std::size_t n = poly.size();
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n];
    const double da = dot(a - origin, normal);
    const double db = dot(b - origin, normal);
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

Polygon clip_convex(std::span<const Point2> subject, std::span<const Point2> ccw_clip) {
  Polygon out(subject.begin(), subject.end());
  const std::size_t n = ccw_clip.size();
  for (std::size_t i = 0; i < n && !out.empty(); ++i) {
    const Point2 a = ccw_clip[i], b = ccw_clip[(i + 1) % n];
    const Point2 d = b - a;
    out = clip_halfplane(out, a, Point2{d.y, -d.x});
  }
  return out;
}

std::vector<Polygon> smooth_outline(std::span<const Polygon> loops, std::size_t passes) {
  std::vector<Polygon> out(loops.begin(), loops.end());
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (auto& loop : out) {
      const std::size_t n = loop.size();
      if (n < 3) continue;
      Polygon next;
      next.reserve(2 * n);
      for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = loop[i], b = loop[(i + 1) % n];
        next.push_back(0.75 * a + 0.25 * b);
        next.push_back(0.25 * a + 0.75 * b);
      }
      loop = std::move(next);
    }
  }
  return out;
}

}  // namespace clusterplot
