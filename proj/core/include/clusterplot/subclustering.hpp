#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clusterplot/dataset.hpp"
#include "clusterplot/matrix.hpp"

namespace clusterplot {

/// BIRCH clustering feature: count, linear sum and squared-norm sum.
struct CFEntry {
  std::size_t n = 0;
  std::vector<double> linear_sum;
  double squared_sum = 0.0;

  explicit CFEntry(std::size_t dim = 0) : linear_sum(dim, 0.0) {}

  void add_point(std::span<const double> x);
  void merge(const CFEntry& other);
  std::vector<double> centroid() const;
  /// RMS distance of members to the centroid, clamped at 0.
  double radius() const;
  /// Radius this entry would have after absorbing x.
  double radius_with(std::span<const double> x) const;
};

struct BirchLeaf {
  CFEntry cf;
  std::vector<std::size_t> members;  // row indices in insertion order
};

struct BirchResult {
  std::vector<BirchLeaf> leaves;          // in creation order
  std::vector<std::size_t> assignment;    // row -> leaf index
  /// Leaf CF sums are taken relative to this point (the column means).
  std::vector<double> origin;

  std::vector<double> centroid(std::size_t leaf) const;
  double radius(std::size_t leaf) const { return leaves[leaf].cf.radius(); }
};

/// Phase-1 BIRCH: single pass CF-tree build in row order. A point joins the
/// nearest leaf entry iff the merged radius stays <= threshold; nodes split at
/// more than `branching` entries using farthest-pair seeds.
BirchResult birch_fit(const Matrix& points, double threshold, std::size_t branching);

struct AnchorBand {
  std::size_t lo = 20;
  std::size_t hi = 60;
};

struct BirchParams {
  /// nullopt selects the automatic threshold search.
  std::optional<double> threshold;
  std::size_t branching = 50;
  AnchorBand auto_target;
  /// Auto mode only: search a separate threshold for every class.
  bool per_class = false;

  void validate() const;
};

struct SubClustering {
  std::vector<std::size_t> assignment;   // data row -> anchor id
  Matrix anchors;                        // N_A x D centroids
  std::vector<std::size_t> anchor_label;
  std::vector<std::size_t> sizes;
  std::vector<double> radii;
  std::vector<std::size_t> class_begin;  // M+1 offsets into anchor ids
  std::vector<double> thresholds;        // threshold used per class
  bool auto_search_failed = false;

  std::size_t num_anchors() const noexcept { return anchor_label.size(); }
  std::size_t num_classes() const noexcept {
    return class_begin.empty() ? 0 : class_begin.size() - 1;
  }

  friend bool operator==(const SubClustering&, const SubClustering&) = default;
};

/// Runs birch_fit on every class separately (concurrently) and concatenates
/// the leaves class by class.
SubClustering subcluster_dataset(const LabeledDataset& ds, const BirchParams& params);

struct AnchorStats {
  std::vector<std::size_t> per_class_counts;
  std::size_t total_anchors = 0;
  std::size_t total_points = 0;
  /// Bin b counts anchors with size in [2^b, 2^(b+1)).
  std::vector<std::size_t> size_histogram;
  double max_radius = 0.0;
};

AnchorStats anchor_stats(const SubClustering& sc);

/// Header `id,label,size,radius,c0..c{D-1}`, one anchor per row.
void write_anchor_dump(const SubClustering& sc, std::span<const std::string> class_names,
                       const std::filesystem::path& path);

}  // namespace clusterplot
