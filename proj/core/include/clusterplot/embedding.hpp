#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "clusterplot/matrix.hpp"
#include "clusterplot/point2.hpp"

namespace clusterplot {

/// Side length of the canonical square all embeddings are mapped into.
inline constexpr double kCanonicalExtent = 100.0;

/// Affine map raw -> canonical: p' = scale * (p - center) + (50, 50).
struct Frame {
  double scale = 1.0;
  Point2 center;

  Point2 apply(Point2 p) const noexcept {
    return Point2{kCanonicalExtent / 2, kCanonicalExtent / 2} + scale * (p - center);
  }
};

/// 2D anchor coordinates in the canonical [0,100]^2 frame.
struct AnchorEmbedding {
  std::vector<Point2> coords;
  Frame frame;
};

enum class EmbedBackend { pca, mds, external };

struct EmbedSpec {
  EmbedBackend backend = EmbedBackend::pca;
  std::filesystem::path external_path;  // backend == external only

  void validate() const;
};

struct RawEmbedding {
  std::vector<Point2> coords;
  /// Set when the second spectral component vanished and the second axis
  /// was filled with zeros.
  bool rank_deficient = false;
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
  std::size_t iterations = 0;
};

/// Leading eigenpairs of a symmetric positive semi-definite matrix by power
/// iteration with Hotelling deflation. Each vector is normalised and signed
/// so that its largest-magnitude component is positive.
std::vector<EigenPair> top_eigenpairs(const Matrix& sym, std::size_t count,
                                      double tolerance = 1e-10, std::size_t max_iterations = 10'000);

/// Projection onto the two leading principal axes of the anchors.
RawEmbedding pca_2d(const Matrix& anchors);

/// Classical (Torgerson) MDS on Euclidean anchor distances.
RawEmbedding mds_2d(const Matrix& anchors);

/// Reads `id,x,y` rows (no header); every id in [0, expected) exactly once.
std::vector<Point2> import_coords(const std::filesystem::path& path, std::size_t expected);

/// Centres the bounding box in [0,100]^2 with its longest side spanning 100.
AnchorEmbedding to_canonical(std::span<const Point2> raw);

/// Backend dispatch followed by to_canonical. `rank_deficient` is set when
/// the chosen spectral backend hit the degenerate case.
AnchorEmbedding embed_anchors(const Matrix& anchors, const EmbedSpec& spec,
                              bool* rank_deficient = nullptr);

}  // namespace clusterplot
