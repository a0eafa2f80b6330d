#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "clusterplot/dataset.hpp"
#include "clusterplot/matrix.hpp"
#include "clusterplot/point2.hpp"

namespace clusterplot {

struct RelationParams {
  std::size_t k_overlap = 10;
  std::size_t k_proximity = 5;
  std::size_t k_confusion = 10;

  void validate() const;
};

/// Directed K-nearest-neighbour graph in compressed row form. Neighbour lists
/// are ordered by ascending distance, ties by ascending node id, and never
/// contain the source node.
struct KnnGraph {
  std::size_t k = 0;
  std::vector<std::size_t> offsets;  // size n+1
  std::vector<std::uint32_t> ids;
  std::vector<double> sq_distances;

  std::size_t size() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::span<const std::uint32_t> neighbors(std::size_t i) const noexcept {
    return {ids.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::span<const double> distances2(std::size_t i) const noexcept {
    return {sq_distances.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  /// True when some node has fewer than k out-edges.
  bool truncated() const noexcept;

  friend bool operator==(const KnnGraph&, const KnnGraph&) = default;
};

enum class KnnMethod {
  automatic,      // kd-tree for 2D input, brute force otherwise
  brute_force,
  spatial_index,  // 2D only
};

/// Exact KNN graph. With `groups`, candidates sharing the query's group are
/// excluded; out-degree then truncates when fewer than k foreign candidates
/// exist. Queries run in parallel with bit-identical results.
KnnGraph build_knn(const Matrix& points, std::size_t k, std::span<const std::size_t> groups = {},
                   KnnMethod method = KnnMethod::automatic);
KnnGraph build_knn(std::span<const Point2> points, std::size_t k, std::span<const std::size_t> groups = {},
                   KnnMethod method = KnnMethod::automatic);

/// counts(g, h) = number of edges from a node in group g to a node in group h.
Matrix edge_counts(const KnnGraph& graph, std::span<const std::size_t> group_of, std::size_t groups);

/// Divides each row by its sum; all-zero rows stay zero.
Matrix row_normalize(Matrix counts);

/// MA^O: fraction of sub-cluster i's out-edges that land in sub-cluster j.
Matrix anchor_overlap(const KnnGraph& graph, std::span<const std::size_t> assignment, std::size_t anchors);

/// ML^O: the same construction with class labels as groups.
Matrix label_overlap(const KnnGraph& graph, std::span<const std::size_t> labels, std::size_t classes);

/// ML^P: label-to-label edge fractions of the anchor KNN graph with
/// same-label edges forbidden. Diagonal is exactly zero.
Matrix proximity(const Matrix& anchors, std::span<const std::size_t> anchor_label, std::size_t classes,
                 std::size_t k);
Matrix proximity(std::span<const Point2> anchors, std::span<const std::size_t> anchor_label,
                 std::size_t classes, std::size_t k);

struct MaeResult {
  double value = 0.0;
  std::size_t row = 0;
  std::size_t col = 0;
};

/// Maximum absolute entry-wise difference and its first row-major argmax.
/// Entries rejected by `include` are skipped.
MaeResult mae(const Matrix& high, const Matrix& low,
              const std::function<bool(std::size_t, std::size_t)>& include = {});

/// Leave-one-out KNN classifier confusion: entry (i, j) is the fraction of
/// class-i points predicted as j. Votes tie-break on the smaller summed
/// neighbour distance, then on the lower label.
Matrix knn_confusion(const LabeledDataset& ds, std::size_t k);

}  // namespace clusterplot
