#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/geometry.hpp"
#include "clusterplot/random.hpp"

namespace clusterplot {

bool Cell::contains(Point2 p) const noexcept {
  if (pieces.empty() || p.x < box.lo.x || p.x > box.hi.x || p.y < box.lo.y || p.y > box.hi.y) return false;
  for (const auto& piece : pieces)
    if (inside_convex(p, piece)) return true;
  return false;
}

namespace {

bool boxes_overlap(const Box& a, const Box& b) noexcept {
  return a.lo.x <= b.hi.x && b.lo.x <= a.hi.x && a.lo.y <= b.hi.y && b.lo.y <= a.hi.y;
}

}  // namespace

std::vector<Cell> clipped_voronoi(std::span<const Point2> sites, const Shape& shape) {
  const std::size_t n = sites.size();
  std::vector<Cell> cells(n);
  if (n == 0) return cells;

  Box frame = bounding_box(shape.vertices);
  const Box site_box = bounding_box(sites);
  frame.lo = {std::min(frame.lo.x, site_box.lo.x) - 1.0, std::min(frame.lo.y, site_box.lo.y) - 1.0};
  frame.hi = {std::max(frame.hi.x, site_box.hi.x) + 1.0, std::max(frame.hi.y, site_box.hi.y) + 1.0};

  std::vector<Polygon> tri_polys;
  std::vector<Box> tri_boxes;
  for (const auto& t : shape.triangles) {
    Polygon poly{shape.vertices[t[0]], shape.vertices[t[1]], shape.vertices[t[2]]};
    if (signed_area(poly) < 0.0) std::swap(poly[1], poly[2]);
    tri_boxes.push_back(bounding_box(poly));
    tri_polys.push_back(std::move(poly));
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = squared_distance(sites[a], sites[i]), db = squared_distance(sites[b], sites[i]);
      return da < db || (da == db && a < b);
    });

    Polygon region{frame.lo, {frame.hi.x, frame.lo.y}, frame.hi, {frame.lo.x, frame.hi.y}};
    bool empty = false;
    for (const auto j : order) {
      if (j == i) continue;
      if (sites[j] == sites[i]) {
        if (j < i) {
          empty = true;
          break;
        }
        continue;
      }
      // A site farther than twice the region's reach cannot cut it.
      double reach2 = 0.0;
      for (const auto& v : region) reach2 = std::max(reach2, squared_distance(v, sites[i]));
      if (squared_distance(sites[j], sites[i]) > 4.0 * reach2) break;
      region = clip_halfplane(region, 0.5 * (sites[i] + sites[j]), sites[j] - sites[i]);
      if (region.size() < 3) {
        empty = true;
        break;
      }
    }
    if (empty) continue;

    Cell& cell = cells[i];
    const Box rbox = bounding_box(region);
    for (std::size_t t = 0; t < tri_polys.size(); ++t) {
      if (!boxes_overlap(rbox, tri_boxes[t])) continue;
      Polygon piece = clip_convex(tri_polys[t], region);
      if (piece.size() < 3) continue;
      const double a = signed_area(piece);
      if (!(a > 0.0)) continue;
      cell.area += a;
      cell.pieces.push_back(std::move(piece));
    }
    std::vector<Point2> all;
    for (const auto& p : cell.pieces) all.insert(all.end(), p.begin(), p.end());
    cell.box = bounding_box(all);
  }
  return cells;
}

void VirtualPointSet::append(const VirtualPointSet& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  owner_anchor.insert(owner_anchor.end(), other.owner_anchor.begin(), other.owner_anchor.end());
  owner_label.insert(owner_label.end(), other.owner_label.begin(), other.owner_label.end());
}

VirtualPointSet sample_virtual(std::span<const Cell> cells, std::span<const std::size_t> counts,
                               std::span<const std::uint64_t> seeds, std::span<const std::size_t> owner_anchor,
                               std::size_t label) {
  constexpr std::size_t kCheckEvery = 1'000'000;
  constexpr double kMinAcceptance = 1e-4;
  VirtualPointSet out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (counts[c] == 0) continue;
    const Cell& cell = cells[c];
    if (!(cell.area > 0.0))
      throw PipelineError(fmt::format("virtual points: cell of anchor {} has no area", owner_anchor[c]));
    std::mt19937_64 rng(seeds[c]);
    const double w = cell.box.hi.x - cell.box.lo.x;
    const double h = cell.box.hi.y - cell.box.lo.y;
    std::size_t accepted = 0, attempts = 0;
    while (accepted < counts[c]) {
      const Point2 p{cell.box.lo.x + uniform01(rng) * w, cell.box.lo.y + uniform01(rng) * h};
      ++attempts;
      if (cell.contains(p)) {
        out.points.push_back(p);
        out.owner_anchor.push_back(owner_anchor[c]);
        out.owner_label.push_back(label);
        ++accepted;
      }
      if (attempts % kCheckEvery == 0 &&
          static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(attempts))
        throw PipelineError(fmt::format("virtual points: cell of anchor {} accepts fewer than 1 in 10^4 samples",
                                        owner_anchor[c]));
    }
  }
  return out;
}

}  // namespace clusterplot
