#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/geometry.hpp"
#include "clusterplot/random.hpp"

namespace clusterplot {

void GeometryParams::validate() const {
  if (alpha_radius && !(*alpha_radius > 0.0)) throw ConfigError("alpha radius must be positive");
  if (lof_k && *lof_k < 2) throw ConfigError("lof k must be at least 2");
  if (!(lof_threshold > 1.0)) throw ConfigError("lof threshold must exceed 1");
  if (!(capsule_radius > 0.0)) throw ConfigError("capsule radius must be positive");
}

std::vector<std::size_t> scale_counts(std::span<const std::size_t> sizes, std::size_t cap) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> out(sizes.begin(), sizes.end());
  if (total <= cap) return out;
  const double f = static_cast<double>(cap) / static_cast<double>(total);
  std::size_t sum = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) continue;
    out[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(sizes[i]) * f)));
    sum += out[i];
  }
  while (sum > cap) {
    const auto it = std::max_element(out.begin(), out.end());
    if (*it <= 1) break;
    --*it;
    --sum;
  }
  return out;
}

namespace {

bool degenerate(std::span<const Point2> pts) {
  if (pts.size() < 3) return true;
  const Point2 a = pts[0];
  std::size_t far = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (squared_distance(a, pts[i]) > squared_distance(a, pts[far])) far = i;
  if (far == 0) return true;
  for (const auto& p : pts)
    if (cross(pts[far] - a, p - a) != 0.0) return false;
  return true;
}

std::size_t nearest(Point2 p, std::span<const Point2> sites, const std::vector<char>& allowed) {
  std::size_t best = sites.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (!allowed[s]) continue;
    const double d = squared_distance(p, sites[s]);
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  return best;
}

}  // namespace

BlobGeometry build_blob(std::size_t label, std::span<const Point2> coords, const SubClustering& sc,
                        const GeometryParams& params) {
  BlobGeometry blob;
  blob.label = label;
  const std::size_t begin = sc.class_begin.at(label), end = sc.class_begin.at(label + 1);
  if (begin == end) throw PipelineError(fmt::format("label {} has no anchors", label));
  const std::size_t n = end - begin;
  std::vector<Point2> pts(n);
  for (std::size_t a = 0; a < n; ++a) {
    blob.anchor_ids.push_back(begin + a);
    pts[a] = coords[begin + a];
  }

  blob.lof_scores.assign(n, 1.0);
  std::vector<char> inlier(n, 1);
  if (n > 3) {
    const std::size_t k = std::min(params.lof_k.value_or(20), n - 1);
    blob.lof_scores = lof(pts, k);
    std::size_t kept = 0;
    for (std::size_t a = 0; a < n; ++a) {
      inlier[a] = blob.lof_scores[a] <= params.lof_threshold;
      kept += inlier[a];
    }
    if (kept < 3) {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return blob.lof_scores[x] < blob.lof_scores[y]; });
      std::fill(inlier.begin(), inlier.end(), 0);
      for (std::size_t r = 0; r < 3; ++r) inlier[order[r]] = 1;
    }
  }

  // Sites: inliers at distinct positions, first occurrence wins.
  std::vector<Point2> sites;
  std::vector<std::size_t> site_of(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    if (!inlier[a]) continue;
    blob.inlier_anchor_ids.push_back(begin + a);
    const auto it = std::find(sites.begin(), sites.end(), pts[a]);
    if (it != sites.end()) {
      site_of[a] = static_cast<std::size_t>(it - sites.begin());
      continue;
    }
    site_of[a] = sites.size();
    sites.push_back(pts[a]);
    blob.cell_anchor_ids.push_back(begin + a);
  }

  blob.shape = degenerate(sites) ? capsule(sites, params.capsule_radius) : alpha_shape(sites, params.alpha_radius);
  blob.cells = clipped_voronoi(sites, blob.shape);

  std::vector<char> usable(sites.size(), 0);
  for (std::size_t s = 0; s < sites.size(); ++s) usable[s] = blob.cells[s].area > 0.0;
  if (std::find(usable.begin(), usable.end(), 1) == usable.end())
    throw PipelineError(fmt::format("label {}: blob has no area", label));

  blob.count_target.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t s = site_of[a];
    blob.count_target[a] = (s < sites.size() && usable[s]) ? s : nearest(pts[a], sites, usable);
  }
  blob.outline = smooth_outline(blob.shape.loops, params.smoothing_passes);
  return blob;
}

VirtualPointSet sample_blob(const BlobGeometry& blob, std::span<const std::size_t> counts, std::uint64_t seed,
                            std::uint64_t key) {
  std::vector<std::size_t> per_cell(blob.cells.size(), 0);
  for (std::size_t a = 0; a < blob.anchor_ids.size(); ++a) per_cell[blob.count_target[a]] += counts[blob.anchor_ids[a]];
  std::vector<std::uint64_t> seeds(blob.cells.size());
  for (std::size_t c = 0; c < blob.cells.size(); ++c) seeds[c] = derive_seed(seed, {blob.label, blob.cell_anchor_ids[c], key});
  return sample_virtual(blob.cells, per_cell, seeds, blob.cell_anchor_ids, blob.label);
}

}  // namespace clusterplot
