#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "clusterplot/error.hpp"
#include "clusterplot/geometry.hpp"
#include "oracles.hpp"

using namespace clusterplot;

namespace {

bool in_circumcircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double ax = a.x - d.x, ay = a.y - d.y, bx = b.x - d.x, by = b.y - d.y, cx = c.x - d.x, cy = c.y - d.y;
  const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay) +
                     (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > 1e-7;
}

double tri_area(std::span<const Point2> pts, const Triangle& t) {
  return 0.5 * cross(pts[t[1]] - pts[t[0]], pts[t[2]] - pts[t[0]]);
}

bool vertex_connected(std::size_t n, const std::vector<Triangle>& tris) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  std::vector<char> touched(n, 0);
  for (const auto& t : tris)
    for (int i = 0; i < 3; ++i) {
      touched[t[i]] = 1;
      parent[find(t[i])] = find(t[(i + 1) % 3]);
    }
  for (std::size_t v = 0; v < n; ++v)
    if (!touched[v] || find(v) != find(0)) return false;
  return true;
}

std::set<std::pair<double, double>> vertex_set(const std::vector<Polygon>& loops) {
  std::set<std::pair<double, double>> s;
  for (const auto& l : loops)
    for (const auto& p : l) s.insert({p.x, p.y});
  return s;
}

}  // namespace

TEST_CASE("polygon basics") {
  const Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  CHECK(signed_area(sq) == 4.0);
  Polygon cw(sq.rbegin(), sq.rend());
  CHECK(signed_area(cw) == -4.0);
  const auto box = bounding_box(sq);
  CHECK(box.lo == Point2{0, 0});
  CHECK(box.hi == Point2{2, 2});
  CHECK(inside_convex({1, 1}, sq));
  CHECK(inside_convex({2, 1}, sq));
  CHECK_FALSE(inside_convex({3, 1}, sq));
  const std::vector<Polygon> ring{sq, Polygon{{0.5, 0.5}, {0.5, 1.5}, {1.5, 1.5}, {1.5, 0.5}}};
  CHECK(inside_loops({0.25, 1}, ring));
  CHECK_FALSE(inside_loops({1, 1}, ring));
  CHECK(circumradius({0, 0}, {2, 0}, {0, 2}) == doctest::Approx(std::sqrt(2.0)));
  const auto half = clip_halfplane(sq, {1, 0}, {1, 0});
  CHECK(signed_area(half) == doctest::Approx(2.0));
  const Polygon tri{{1, -1}, {3, 1}, {1, 3}};
  CHECK(signed_area(clip_convex(sq, tri)) == doctest::Approx(2.0));
}

TEST_CASE("convex hull contains every point and is convex") {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = oracle::random_points(rng, 100);
    const auto hull = convex_hull(pts);
    CHECK(signed_area(hull) > 0.0);
    for (std::size_t i = 0; i < hull.size(); ++i)
      CHECK(cross(hull[(i + 1) % hull.size()] - hull[i], hull[(i + 2) % hull.size()] - hull[(i + 1) % hull.size()]) > 0);
    for (const auto& p : pts) CHECK(inside_convex(p, hull));
  }
}

TEST_CASE("LOF matches the definition-level oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = oracle::random_points(rng, 40);
    pts.push_back({300.0 + trial, -50.0});
    for (const std::size_t k : {2, 5, 10}) {
      const auto got = lof(pts, k);
      const auto ref = oracle::lof(pts, k);
      for (std::size_t i = 0; i < pts.size(); ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("LOF on a collinear chain, derived by hand") {
  // k = 1: k-distances 1, 1, 2, 4; lrd 1, 1, 1/2, 1/4.
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {3, 0}, {7, 0}};
  const auto s = lof(pts, 1);
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(1.0));
  CHECK(s[2] == doctest::Approx(2.0));
  CHECK(s[3] == doctest::Approx(2.0));
}

TEST_CASE("LOF tolerates coincident points") {
  const std::vector<Point2> pts{{0, 0}, {0, 0}, {0, 0}, {0, 0}, {5, 5}};
  const auto s = lof(pts, 2);
  for (const double v : s) CHECK(std::isfinite(v));
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[4] > 1.5);
}

TEST_CASE("Delaunay triangulation is valid and empty-circle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    auto pts = oracle::random_points(rng, 60 + 20 * trial);
    if (trial % 3 == 2)
      for (auto& p : pts) p = {std::round(p.x / 10), std::round(p.y / 10)};  // many cocircular quads and duplicates
    const auto tris = delaunay(pts);
    REQUIRE_FALSE(tris.empty());
    double total = 0.0;
    for (const auto& t : tris) {
      const double a = tri_area(pts, t);
      CHECK(a > 0.0);
      total += a;
      for (std::size_t q = 0; q < pts.size(); ++q) {
        if (q == t[0] || q == t[1] || q == t[2]) continue;
        CHECK_FALSE(in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[q]));
      }
    }
    CHECK(total == doctest::Approx(signed_area(convex_hull(pts))).epsilon(1e-9));
  }
  CHECK(delaunay(std::vector<Point2>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}).empty());
  CHECK(delaunay(std::vector<Point2>{{0, 0}, {1, 1}}).empty());
}

TEST_CASE("alpha shape with a large radius is the convex hull") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = oracle::random_points(rng, 80);
    const auto shape = alpha_shape(pts, 1e9);
    REQUIRE(shape.loops.size() == 1);
    CHECK(vertex_set(shape.loops) == vertex_set({convex_hull(pts)}));
    CHECK(shape.area() == doctest::Approx(signed_area(convex_hull(pts))).epsilon(1e-9));
  }
}

TEST_CASE("automatic alpha radius is the smallest connected one") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 8; ++trial) {
    auto pts = oracle::random_points(rng, 70);
    for (std::size_t i = 0; i < 20; ++i) pts.push_back({150.0 + pts[i].x / 4, pts[i].y / 4});  // second lump
    const auto shape = alpha_shape(pts, std::nullopt);
    CHECK(vertex_connected(shape.vertices.size(), shape.triangles));

    // Oracle: bisection over the sorted Delaunay circumradii.
    const auto all = delaunay(shape.vertices);
    std::vector<double> radii;
    for (const auto& t : all) radii.push_back(circumradius(shape.vertices[t[0]], shape.vertices[t[1]], shape.vertices[t[2]]));
    std::sort(radii.begin(), radii.end());
    std::size_t lo = 0, hi = radii.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      std::vector<Triangle> kept;
      for (const auto& t : all)
        if (circumradius(shape.vertices[t[0]], shape.vertices[t[1]], shape.vertices[t[2]]) <= radii[mid]) kept.push_back(t);
      if (vertex_connected(shape.vertices.size(), kept)) hi = mid;
      else lo = mid + 1;
    }
    CHECK(shape.radius == radii[lo]);
  }
}

TEST_CASE("alpha shape boundary loops") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pts = oracle::random_points(rng, 120);
    const auto shape = alpha_shape(pts, std::nullopt);
    double area = 0.0;
    for (const auto& loop : shape.loops) {
      CHECK(oracle::is_simple(loop));
      area += signed_area(loop);
    }
    CHECK(area == doctest::Approx(shape.area()).epsilon(1e-9));
    CHECK(area > 0.0);
  }
}

TEST_CASE("alpha shape errors") {
  const std::vector<Point2> pts{{0, 0}, {10, 0}, {0, 10}, {10, 10}};
  CHECK_THROWS_AS(alpha_shape(pts, 1.0), PipelineError);
  CHECK_THROWS_AS(alpha_shape(std::vector<Point2>{{0, 0}, {1, 1}, {2, 2}}, std::nullopt), DataError);
  CHECK_THROWS_AS(alpha_shape(std::vector<Point2>{{0, 0}, {0, 0}, {1, 1}}, std::nullopt), DataError);
}

TEST_CASE("capsule around degenerate anchors") {
  const std::vector<Point2> pts{{0, 0}, {10, 0}};
  const auto shape = capsule(pts, 2.0);
  CHECK(shape.capsule);
  const double expected = 10.0 * 4.0 + std::numbers::pi * 4.0;
  CHECK(shape.area() == doctest::Approx(expected).epsilon(0.01));
  CHECK(shape.area() < expected);
  for (const auto& p : pts) CHECK(inside_loops(p, shape.loops));
  const auto single = capsule(std::vector<Point2>{{5, 5}}, 1.0);
  CHECK(single.area() == doctest::Approx(std::numbers::pi).epsilon(0.01));
}

TEST_CASE("clipped Voronoi cells tile the shape") {
  std::mt19937_64 rng(46);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sites = oracle::random_points(rng, 40);
    const auto shape = alpha_shape(sites, std::nullopt);
    const auto cells = clipped_voronoi(sites, shape);
    REQUIRE(cells.size() == sites.size());
    double total = 0.0;
    for (std::size_t s = 0; s < sites.size(); ++s) {
      total += cells[s].area;
      CHECK(cells[s].contains(sites[s]));
    }
    CHECK(std::abs(total - shape.area()) <= 0.005 * shape.area());

    // Random probes inside the shape lie in exactly the cell of their nearest site.
    const auto box = bounding_box(sites);
    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
    for (int probe = 0; probe < 300; ++probe) {
      const Point2 p{ux(rng), uy(rng)};
      std::size_t owners = 0, owner = 0;
      for (std::size_t s = 0; s < cells.size(); ++s)
        if (cells[s].contains(p)) ++owners, owner = s;
      if (!inside_loops(p, shape.loops)) {
        CHECK(owners == 0);
        continue;
      }
      REQUIRE(owners == 1);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& s : sites) best = std::min(best, squared_distance(p, s));
      CHECK(squared_distance(p, sites[owner]) == doctest::Approx(best));
    }
  }
}

TEST_CASE("coincident sites get empty cells") {
  const std::vector<Point2> sites{{0, 0}, {10, 0}, {0, 10}, {10, 0}};
  const auto cells = clipped_voronoi(sites, alpha_shape(sites, std::nullopt));
  CHECK(cells[3].area == 0.0);
  CHECK(cells[1].area > 0.0);
}

TEST_CASE("virtual points honour counts and cells") {
  std::mt19937_64 rng(47);
  const auto sites = oracle::random_points(rng, 25);
  const auto cells = clipped_voronoi(sites, alpha_shape(sites, std::nullopt));
  std::vector<std::size_t> counts(25), owners(25);
  std::vector<std::uint64_t> seeds(25);
  for (std::size_t c = 0; c < 25; ++c) counts[c] = 1 + c * 3, owners[c] = 100 + c, seeds[c] = c * 7919;
  const auto v = sample_virtual(cells, counts, seeds, owners, 4);
  CHECK(v.points.size() == std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<std::size_t> seen(25, 0);
  for (std::size_t i = 0; i < v.points.size(); ++i) {
    const std::size_t c = v.owner_anchor[i] - 100;
    ++seen[c];
    CHECK(v.owner_label[i] == 4);
    CHECK(cells[c].contains(v.points[i]));
  }
  CHECK(seen == counts);
  const auto again = sample_virtual(cells, counts, seeds, owners, 4);
  CHECK(again.points == v.points);
}

TEST_CASE("count scaling") {
  const std::vector<std::size_t> sizes{1000, 10, 1, 0, 500};
  CHECK(scale_counts(sizes, 10000) == sizes);
  const auto s = scale_counts(sizes, 100);
  CHECK(std::accumulate(s.begin(), s.end(), std::size_t{0}) <= 100);
  CHECK(s[2] >= 1);
  CHECK(s[3] == 0);
  CHECK(s[0] > s[4]);
  CHECK(s[4] > s[1]);
}

TEST_CASE("outline smoothing") {
  const std::vector<Polygon> sq{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}};
  const auto once = smooth_outline(sq, 1);
  CHECK(once[0].size() == 8);
  CHECK(once[0][0] == Point2{1, 0});
  CHECK(once[0][1] == Point2{3, 0});
  const auto thrice = smooth_outline(sq, 3);
  CHECK(thrice[0].size() == 32);
  CHECK(signed_area(thrice[0]) > 0.0);
  CHECK(signed_area(thrice[0]) < 16.0);
  CHECK(oracle::is_simple(thrice[0]));
  CHECK(smooth_outline(sq, 0) == sq);
}

TEST_CASE("blob construction filters outliers and covers every anchor") {
  std::mt19937_64 rng(48);
  auto pts = oracle::random_points(rng, 30, 20.0);
  pts.push_back({90, 90});
  const auto sc = oracle::planar_subclustering(std::vector<std::size_t>(31, 0));
  GeometryParams gp;
  const auto blob = build_blob(0, pts, sc, gp);
  CHECK(blob.inlier_anchor_ids.size() == 30);
  CHECK(std::find(blob.inlier_anchor_ids.begin(), blob.inlier_anchor_ids.end(), 30) == blob.inlier_anchor_ids.end());
  CHECK(blob.lof_scores[30] > gp.lof_threshold);
  CHECK(blob.count_target.size() == 31);
  CHECK(blob.cells.size() == blob.cell_anchor_ids.size());
  CHECK(!blob.outline.empty());

  std::vector<std::size_t> counts(31, 3);
  const auto v = sample_blob(blob, counts, 1, 0);
  CHECK(v.points.size() == 93);
  CHECK(sample_blob(blob, counts, 1, 0).points == v.points);
  CHECK(sample_blob(blob, counts, 1, 1).points != v.points);
}

TEST_CASE("blob keeps at least three anchors") {
  // Two tight pairs far apart: LOF flags nothing or everything; never fewer than three survive.
  const std::vector<Point2> pts{{0, 0}, {0.1, 0}, {50, 50}, {50.1, 50}, {100, 0}};
  const auto sc = oracle::planar_subclustering(std::vector<std::size_t>(5, 0));
  GeometryParams gp;
  gp.lof_threshold = 0.5;
  const auto blob = build_blob(0, pts, sc, gp);
  CHECK(blob.inlier_anchor_ids.size() == 3);
}

TEST_CASE("degenerate labels become capsules") {
  const std::vector<Point2> pts{{10, 10}, {20, 10}, {30, 10}, {50, 50}, {52, 50}, {51, 52}};
  const auto sc = oracle::planar_subclustering({0, 0, 0, 1, 1, 1}, {5, 5, 5, 2, 2, 2});
  const auto blob = build_blob(0, pts, sc, GeometryParams{});
  CHECK(blob.shape.capsule);
  CHECK(blob.cells.size() == 3);
  double total = 0.0;
  for (const auto& c : blob.cells) total += c.area;
  CHECK(total == doctest::Approx(blob.shape.area()).epsilon(0.005));
  const auto other = build_blob(1, pts, sc, GeometryParams{});
  CHECK_FALSE(other.shape.capsule);
}

TEST_CASE("geometry parameter validation") {
  GeometryParams p;
  p.lof_threshold = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = GeometryParams{};
  p.alpha_radius = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
