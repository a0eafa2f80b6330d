#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/geometry.hpp"

namespace clusterplot {

double Shape::area() const noexcept {
  double s = 0.0;
  for (const auto& t : triangles)
    s += 0.5 * std::abs(cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]));
  return s;
}

namespace {

std::vector<Point2> distinct_points(std::span<const Point2> pts) {
  std::vector<Point2> out(pts.begin(), pts.end());
  std::sort(out.begin(), out.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Smallest circumradius at which the kept triangles (vertex-connected) form
// one component touching every vertex. Adding triangles never breaks this,
// so a single ascending sweep finds it.
double connectivity_radius(std::size_t nverts, const std::vector<Triangle>& tris, const std::vector<double>& radius) {
  std::vector<std::size_t> order(tris.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });
  UnionFind uf(nverts);
  std::vector<char> covered(nverts, 0);
  std::size_t n_covered = 0, components = 0;
  for (const auto t : order) {
    for (const auto v : tris[t])
      if (!covered[v]) {
        covered[v] = 1;
        ++n_covered;
        ++components;
      }
    if (uf.unite(tris[t][0], tris[t][1])) --components;
    if (uf.unite(tris[t][1], tris[t][2])) --components;
    if (n_covered == nverts && components == 1) return radius[t];
  }
  return radius[order.back()];
}

std::vector<Polygon> stitch_boundary(const std::vector<Point2>& verts, const std::vector<Triangle>& kept) {
  std::unordered_map<std::uint64_t, int> uses;
  auto undirected = [](std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
  };
  for (const auto& t : kept)
    for (int i = 0; i < 3; ++i) ++uses[undirected(t[i], t[(i + 1) % 3])];

  struct Edge {
    std::uint32_t from, to;
  };
  std::vector<Edge> edges;
  for (const auto& t : kept)
    for (int i = 0; i < 3; ++i)
      if (uses[undirected(t[i], t[(i + 1) % 3])] == 1) edges.push_back({t[i], t[(i + 1) % 3]});

  std::unordered_map<std::uint32_t, std::vector<std::size_t>> outgoing;
  for (std::size_t e = 0; e < edges.size(); ++e) outgoing[edges[e].from].push_back(e);

  std::vector<char> used(edges.size(), 0);
  std::vector<Polygon> loops;
  for (std::size_t seed = 0; seed < edges.size(); ++seed) {
    if (used[seed]) continue;
    Polygon loop;
    std::size_t e = seed;
    while (!used[e]) {
      used[e] = 1;
      loop.push_back(verts[edges[e].from]);
      const std::uint32_t v = edges[e].to;
      const Point2 back = verts[edges[e].from] - verts[v];
      const double a_in = std::atan2(back.y, back.x);
      // Interior lies clockwise of the incoming edge; the next boundary edge
      // is the first outgoing one reached turning clockwise.
      std::size_t next = seed;
      double best = std::numeric_limits<double>::infinity();
      for (const auto cand : outgoing[v]) {
        if (used[cand] && cand != seed) continue;
        const Point2 out = verts[edges[cand].to] - verts[v];
        double cw = a_in - std::atan2(out.y, out.x);
        while (cw <= 0.0) cw += 2.0 * std::numbers::pi;
        while (cw > 2.0 * std::numbers::pi) cw -= 2.0 * std::numbers::pi;
        if (cw < best) {
          best = cw;
          next = cand;
        }
      }
      e = next;
    }
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace

Shape alpha_shape(std::span<const Point2> pts, std::optional<double> radius) {
  Shape shape;
  shape.vertices = distinct_points(pts);
  const auto all = delaunay(shape.vertices);
  if (all.empty())
    throw DataError(fmt::format("alpha shape needs 3 non-collinear points ({} distinct given)", shape.vertices.size()));

  std::vector<double> r(all.size());
  for (std::size_t t = 0; t < all.size(); ++t)
    r[t] = circumradius(shape.vertices[all[t][0]], shape.vertices[all[t][1]], shape.vertices[all[t][2]]);

  if (radius) {
    if (!(*radius > 0.0)) throw ConfigError("alpha radius must be positive");
    shape.radius = *radius;
  } else {
    shape.radius = connectivity_radius(shape.vertices.size(), all, r);
  }
  for (std::size_t t = 0; t < all.size(); ++t)
    if (r[t] <= shape.radius) shape.triangles.push_back(all[t]);
  if (shape.triangles.empty())
    throw PipelineError(fmt::format("alpha radius {} keeps no triangle (smallest circumradius {})", shape.radius,
                                    *std::min_element(r.begin(), r.end())));
  shape.loops = stitch_boundary(shape.vertices, shape.triangles);
  return shape;
}

Shape capsule(std::span<const Point2> pts, double radius, std::size_t segments) {
  if (pts.empty()) throw PipelineError("capsule needs at least one point");
  if (!(radius > 0.0)) throw ConfigError("capsule radius must be positive");
  const auto centers = distinct_points(pts);
  std::vector<Point2> ring;
  ring.reserve(centers.size() * segments);
  for (const auto& c : centers)
    for (std::size_t s = 0; s < segments; ++s) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(segments);
      ring.push_back(c + radius * Point2{std::cos(a), std::sin(a)});
    }
  Shape shape;
  shape.vertices = convex_hull(ring);
  shape.radius = radius;
  shape.capsule = true;
  for (std::uint32_t i = 1; i + 1 < shape.vertices.size(); ++i) shape.triangles.push_back({0, i, i + 1});
  shape.loops.push_back(shape.vertices);
  return shape;
}

}  // namespace clusterplot
