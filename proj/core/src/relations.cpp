#include "clusterplot/relations.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/parallel.hpp"

namespace clusterplot {

void RelationParams::validate() const {
  if (k_overlap < 1 || k_proximity < 1 || k_confusion < 1)
    throw ConfigError("neighbour counts K_O, K_P, K_C must be at least 1");
}

bool KnnGraph::truncated() const noexcept {
  for (std::size_t i = 0; i < size(); ++i)
    if (offsets[i + 1] - offsets[i] < k) return true;
  return false;
}

namespace {

struct Candidate {
  double d2;
  std::uint32_t id;
  friend bool operator<(const Candidate& a, const Candidate& b) noexcept {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.id < b.id);
  }
};

// Sorted best-k list; insertion keeps (d2, id) order.
class BestK {
 public:
  explicit BestK(std::size_t k) : k_(k) { items_.reserve(k + 1); }
  bool full() const noexcept { return items_.size() == k_; }
  double worst() const noexcept { return items_.back().d2; }
  void offer(Candidate c) {
    if (full() && !(c < items_.back())) return;
    items_.insert(std::upper_bound(items_.begin(), items_.end(), c), c);
    if (items_.size() > k_) items_.pop_back();
  }
  const std::vector<Candidate>& items() const noexcept { return items_; }

 private:
  std::size_t k_;
  std::vector<Candidate> items_;
};

// 2D kd-tree over an index permutation; leaves hold up to kLeaf points.
class KdTree2 {
 public:
  explicit KdTree2(std::span<const Point2> pts) : pts_(pts), perm_(pts.size()) {
    std::iota(perm_.begin(), perm_.end(), 0u);
    if (!pts.empty()) build(0, pts.size());
  }

  template <class Skip>
  void query(Point2 q, BestK& best, Skip&& skip) const {
    if (!nodes_.empty()) visit(0, q, best, skip);
  }

 private:
  static constexpr std::size_t kLeaf = 8;
  struct Node {
    std::size_t begin, end;
    int axis;  // -1 for leaf
    double split;
    std::size_t left, right;
  };

  static double coord(Point2 p, int axis) noexcept { return axis == 0 ? p.x : p.y; }

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end, -1, 0.0, 0, 0});
    if (end - begin <= kLeaf) return id;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto p = pts_[perm_[i]];
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const int axis = (x1 - x0) >= (y1 - y0) ? 0 : 1;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + static_cast<std::ptrdiff_t>(begin), perm_.begin() + static_cast<std::ptrdiff_t>(mid),
                     perm_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
                       return ca < cb || (ca == cb && a < b);
                     });
    const double split = coord(pts_[perm_[mid]], axis);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  // Left subtree coordinates are <= split and right ones >= split, so the
  // squared gap to the split line bounds every far-side distance. Ties are
  // visited (<=) so equal-distance lower ids are never pruned.
  template <class Skip>
  void visit(std::size_t id, Point2 q, BestK& best, Skip& skip) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t j = perm_[i];
        if (skip(j)) continue;
        const double dx = q.x - pts_[j].x;
        const double dy = q.y - pts_[j].y;
        best.offer({dx * dx + dy * dy, j});
      }
      return;
    }
    const double diff = coord(q, node.axis) - node.split;
    const std::size_t near = diff <= 0.0 ? node.left : node.right;
    const std::size_t far = diff <= 0.0 ? node.right : node.left;
    visit(near, q, best, skip);
    const double gap = diff <= 0.0 ? node.split - coord(q, node.axis) : coord(q, node.axis) - node.split;
    if (!best.full() || gap * gap <= best.worst()) visit(far, q, best, skip);
  }

  std::span<const Point2> pts_;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
};

template <class QueryFn>
KnnGraph assemble(std::size_t n, std::size_t k, QueryFn&& query) {
  std::vector<std::vector<Candidate>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    BestK best(k);
    query(i, best);
    rows[i] = best.items();
  });
  KnnGraph g;
  g.k = k;
  g.offsets.reserve(n + 1);
  g.offsets.push_back(0);
  for (const auto& r : rows) {
    for (const auto& c : r) {
      g.ids.push_back(c.id);
      g.sq_distances.push_back(c.d2);
    }
    g.offsets.push_back(g.ids.size());
  }
  return g;
}

void check_inputs(std::size_t n, std::size_t k, std::span<const std::size_t> groups) {
  if (k == 0) throw ConfigError("KNN: k must be at least 1");
  if (!groups.empty() && groups.size() != n)
    throw PipelineError(fmt::format("KNN: {} group ids for {} points", groups.size(), n));
  if (n > std::numeric_limits<std::uint32_t>::max()) throw PipelineError("KNN: too many points");
}

KnnGraph knn_2d(std::span<const Point2> pts, std::size_t k, std::span<const std::size_t> groups,
                KnnMethod method) {
  const std::size_t n = pts.size();
  auto skipper = [&](std::size_t i) {
    return [&, i](std::uint32_t j) { return j == i || (!groups.empty() && groups[j] == groups[i]); };
  };
  if (method == KnnMethod::brute_force) {
    return assemble(n, k, [&](std::size_t i, BestK& best) {
      const auto skip = skipper(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (skip(static_cast<std::uint32_t>(j))) continue;
        const double dx = pts[i].x - pts[j].x;
        const double dy = pts[i].y - pts[j].y;
        best.offer({dx * dx + dy * dy, static_cast<std::uint32_t>(j)});
      }
    });
  }
  const KdTree2 tree(pts);
  return assemble(n, k, [&](std::size_t i, BestK& best) {
    auto skip = skipper(i);
    tree.query(pts[i], best, skip);
  });
}

}  // namespace

KnnGraph build_knn(std::span<const Point2> points, std::size_t k, std::span<const std::size_t> groups,
                   KnnMethod method) {
  check_inputs(points.size(), k, groups);
  return knn_2d(points, k, groups, method);
}

KnnGraph build_knn(const Matrix& points, std::size_t k, std::span<const std::size_t> groups, KnnMethod method) {
  const std::size_t n = points.rows();
  check_inputs(n, k, groups);
  if (points.cols() == 2 && method != KnnMethod::brute_force) {
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {points(i, 0), points(i, 1)};
    return knn_2d(pts, k, groups, KnnMethod::spatial_index);
  }
  if (method == KnnMethod::spatial_index)
    throw PipelineError(fmt::format("KNN: spatial index needs 2D points, got {}D", points.cols()));
  return assemble(n, k, [&](std::size_t i, BestK& best) {
    const auto qi = points.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || (!groups.empty() && groups[j] == groups[i])) continue;
      best.offer({squared_distance(qi, points.row(j)), static_cast<std::uint32_t>(j)});
    }
  });
}

Matrix edge_counts(const KnnGraph& graph, std::span<const std::size_t> group_of, std::size_t groups) {
  if (group_of.size() != graph.size())
    throw PipelineError(fmt::format("{} group ids for a graph of {} nodes", group_of.size(), graph.size()));
  Matrix counts(groups, groups);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const std::size_t g = group_of[i];
    for (const auto j : graph.neighbors(i)) counts(g, group_of[j]) += 1.0;
  }
  return counts;
}

Matrix row_normalize(Matrix counts) {
  for (std::size_t r = 0; r < counts.rows(); ++r) {
    auto row = counts.row(r);
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 0.0)
      for (auto& v : row) v /= total;
  }
  return counts;
}

Matrix anchor_overlap(const KnnGraph& graph, std::span<const std::size_t> assignment, std::size_t anchors) {
  return row_normalize(edge_counts(graph, assignment, anchors));
}

Matrix label_overlap(const KnnGraph& graph, std::span<const std::size_t> labels, std::size_t classes) {
  return row_normalize(edge_counts(graph, labels, classes));
}

namespace {

Matrix proximity_from_graph(const KnnGraph& g, std::span<const std::size_t> anchor_label, std::size_t classes) {
  Matrix p = row_normalize(edge_counts(g, anchor_label, classes));
  for (std::size_t c = 0; c < classes; ++c) p(c, c) = 0.0;
  return p;
}

void check_proximity(std::size_t n, std::span<const std::size_t> anchor_label, std::size_t classes) {
  if (classes < 2) throw DataError("proximity needs at least 2 labels");
  if (anchor_label.size() != n)
    throw PipelineError(fmt::format("{} anchor labels for {} anchors", anchor_label.size(), n));
  std::vector<char> present(classes, 0);
  for (const auto l : anchor_label) present.at(l) = 1;
  for (std::size_t c = 0; c < classes; ++c)
    if (!present[c]) throw DataError(fmt::format("proximity: label {} has no anchors", c));
}

}  // namespace

Matrix proximity(const Matrix& anchors, std::span<const std::size_t> anchor_label, std::size_t classes,
                 std::size_t k) {
  check_proximity(anchors.rows(), anchor_label, classes);
  return proximity_from_graph(build_knn(anchors, k, anchor_label), anchor_label, classes);
}

Matrix proximity(std::span<const Point2> anchors, std::span<const std::size_t> anchor_label, std::size_t classes,
                 std::size_t k) {
  check_proximity(anchors.size(), anchor_label, classes);
  return proximity_from_graph(build_knn(anchors, k, anchor_label), anchor_label, classes);
}

MaeResult mae(const Matrix& high, const Matrix& low, const std::function<bool(std::size_t, std::size_t)>& include) {
  if (high.rows() != low.rows() || high.cols() != low.cols())
    throw PipelineError(fmt::format("mae: shape mismatch {}x{} vs {}x{}", high.rows(), high.cols(), low.rows(),
                                    low.cols()));
  MaeResult best;
  bool any = false;
  for (std::size_t i = 0; i < high.rows(); ++i)
    for (std::size_t j = 0; j < high.cols(); ++j) {
      if (include && !include(i, j)) continue;
      const double d = std::abs(high(i, j) - low(i, j));
      if (!any || d > best.value) {
        best = {d, i, j};
        any = true;
      }
    }
  return best;
}

Matrix knn_confusion(const LabeledDataset& ds, std::size_t k) {
  const std::size_t m = ds.num_classes();
  for (const auto c : ds.class_counts())
    if (c < 2) throw DataError("knn_confusion: every class needs more than one point");
  const KnnGraph g = build_knn(ds.points, k);
  std::vector<std::size_t> predicted(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    std::vector<std::size_t> votes(m, 0);
    std::vector<double> dist(m, 0.0);
    const auto nb = g.neighbors(i);
    const auto d2 = g.distances2(i);
    for (std::size_t t = 0; t < nb.size(); ++t) {
      const auto l = ds.labels[nb[t]];
      ++votes[l];
      dist[l] += std::sqrt(d2[t]);
    }
    std::size_t win = 0;
    for (std::size_t l = 1; l < m; ++l)
      if (votes[l] > votes[win] || (votes[l] == votes[win] && dist[l] < dist[win])) win = l;
    predicted[i] = win;
  });
  Matrix counts(m, m);
  for (std::size_t i = 0; i < ds.size(); ++i) counts(ds.labels[i], predicted[i]) += 1.0;
  return row_normalize(std::move(counts));
}

}  // namespace clusterplot
