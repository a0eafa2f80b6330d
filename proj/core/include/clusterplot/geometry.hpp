#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clusterplot/point2.hpp"
#include "clusterplot/subclustering.hpp"

namespace clusterplot {

/// Closed polygon; the last vertex connects back to the first.
using Polygon = std::vector<Point2>;

struct Box {
  Point2 lo;
  Point2 hi;
};

double signed_area(std::span<const Point2> loop) noexcept;
Box bounding_box(std::span<const Point2> pts) noexcept;
/// Even-odd point-in-polygon over every loop.
bool inside_loops(Point2 p, std::span<const Polygon> loops) noexcept;
/// Inclusive test against a counter-clockwise convex polygon.
bool inside_convex(Point2 p, std::span<const Point2> ccw) noexcept;
double circumradius(Point2 a, Point2 b, Point2 c) noexcept;
/// Andrew's monotone chain; counter-clockwise without collinear vertices.
Polygon convex_hull(std::span<const Point2> pts);

/// Keeps the part of a convex polygon on the side where
/// dot(x - origin, normal) <= 0.
Polygon clip_halfplane(std::span<const Point2> poly, Point2 origin, Point2 normal);
/// Intersection of a polygon with a counter-clockwise convex clip polygon.
Polygon clip_convex(std::span<const Point2> subject, std::span<const Point2> ccw_clip);

/// Local Outlier Factor with the original neighbourhood definition: N_k(p)
/// holds every point within the k-distance of p, so ties are all included.
/// Mean reachability distances are floored at `epsilon` so coincident points
/// share a finite density.
std::vector<double> lof(std::span<const Point2> pts, std::size_t k, double epsilon = 1e-9);

using Triangle = std::array<std::uint32_t, 3>;

/// Delaunay triangulation (incremental sweep with Lawson flips).
/// Triangles are counter-clockwise index triples into `pts`. Duplicate
/// points are left unused. Returns no triangles for fewer than three distinct
/// points or when all points are collinear.
std::vector<Triangle> delaunay(std::span<const Point2> pts);

/// Region bounded by an alpha shape (or the capsule fallback), kept both as
/// interior-disjoint triangles and as boundary loops.
struct Shape {
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  /// Outer loops counter-clockwise, holes clockwise.
  std::vector<Polygon> loops;
  double radius = 0.0;  // circumradius bound used; capsule radius for capsules
  bool capsule = false;

  double area() const noexcept;
};

/// Delaunay triangles with circumradius <= radius; the boundary is stitched
/// from edges used by exactly one kept triangle. With no radius, the
/// smallest candidate radius whose kept triangles form a single
/// vertex-connected component touching every distinct point is used.
/// Throws PipelineError when an explicit radius keeps no triangle, and
/// DataError for fewer than three distinct or collinear points.
Shape alpha_shape(std::span<const Point2> pts, std::optional<double> radius);

/// Convex hull of disks of the given radius around the points.
Shape capsule(std::span<const Point2> pts, double radius, std::size_t segments = 32);

/// A clipped Voronoi cell as a union of interior-disjoint convex pieces.
struct Cell {
  std::vector<Polygon> pieces;
  double area = 0.0;
  Box box;

  bool contains(Point2 p) const noexcept;
};

/// For each site: {x in shape : site is a nearest site}. Coincident sites
/// after the first receive empty cells.
std::vector<Cell> clipped_voronoi(std::span<const Point2> sites, const Shape& shape);

struct VirtualPointSet {
  std::vector<Point2> points;
  std::vector<std::size_t> owner_anchor;
  std::vector<std::size_t> owner_label;

  void append(const VirtualPointSet& other);
};

/// Rejection sampling: draws counts[c] points uniformly in cell c using a
/// stream seeded with seeds[c]. Throws PipelineError naming the cell when
/// the acceptance rate drops below 1e-4 after 10^6 attempts.
VirtualPointSet sample_virtual(std::span<const Cell> cells, std::span<const std::size_t> counts,
                               std::span<const std::uint64_t> seeds, std::span<const std::size_t> owner_anchor,
                               std::size_t label);

/// Chaikin corner cutting (1/4, 3/4) applied `passes` times to each loop.
std::vector<Polygon> smooth_outline(std::span<const Polygon> loops, std::size_t passes);

/// Scales sub-cluster sizes so the total stays within cap while every
/// non-empty sub-cluster keeps at least one point.
std::vector<std::size_t> scale_counts(std::span<const std::size_t> sizes, std::size_t cap);

struct GeometryParams {
  std::optional<double> alpha_radius;  // nullopt = auto
  std::optional<std::size_t> lof_k;    // nullopt = min(20, n - 1)
  double lof_threshold = 1.5;
  std::size_t smoothing_passes = 3;
  std::size_t virtual_cap = 20'000;
  double capsule_radius = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Everything drawn and measured for one label.
struct BlobGeometry {
  std::size_t label = 0;
  std::vector<std::size_t> anchor_ids;       // every anchor of the label
  std::vector<double> lof_scores;            // parallel to anchor_ids; 1 when not computed
  std::vector<std::size_t> inlier_anchor_ids;
  /// Anchor id owning each cell (inliers with distinct positions).
  std::vector<std::size_t> cell_anchor_ids;
  std::vector<Cell> cells;
  /// For each entry of anchor_ids: index of the cell its points go to.
  std::vector<std::size_t> count_target;
  Shape shape;
  std::vector<Polygon> outline;

  double area() const noexcept { return shape.area(); }
};

/// LOF filtering (never fewer than 3 inliers), alpha shape or capsule on the
/// inliers, clipped Voronoi cells, and outline smoothing. Points of outlier,
/// coincident or cell-less anchors are redirected to the nearest cell.
BlobGeometry build_blob(std::size_t label, std::span<const Point2> coords, const SubClustering& sc,
                        const GeometryParams& params);

/// Virtual points for one blob; counts[a] is indexed by global anchor id.
/// Stream seeds derive from (seed, label, anchor, key); callers pass a key
/// that identifies the geometry.
VirtualPointSet sample_blob(const BlobGeometry& blob, std::span<const std::size_t> counts, std::uint64_t seed,
                            std::uint64_t key);

}  // namespace clusterplot
