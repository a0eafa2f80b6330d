#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "clusterplot/dataset.hpp"

namespace clusterplot {

struct ToyParams {
  /// Total number of points.
  std::size_t n = 2000;
  /// gaussians only.
  std::size_t classes = 4;
  /// gaussians only; raised to `classes` when smaller.
  std::size_t dim = 0;
  /// gaussians only: centre distance in units of sigma.
  double separation = 10.0;
  double sigma = 1.0;
};

/// Blue: two dense 3D Gaussian lobes joined by a sparse cylindrical neck.
/// Orange: a small dense Gaussian beside the neck (one fifth of the points).
LabeledDataset make_hourglass(std::size_t n, std::uint64_t seed);

/// Seven thick 3D arms of equal length and radius radiating from the origin,
/// with point counts growing geometrically by a factor of 10 from the
/// sparsest to the densest arm.
LabeledDataset make_cross(std::size_t n, std::uint64_t seed);

/// `classes` isotropic Gaussians on simplex vertices, pairwise centre
/// distance separation * sigma, equal class sizes (remainder to the first).
LabeledDataset make_gaussians(const ToyParams& params, std::uint64_t seed);

/// Dispatch by name: hourglass, cross or gaussians. Unknown names raise
/// ConfigError.
LabeledDataset generate_toy(const std::string& name, const ToyParams& params, std::uint64_t seed);

}  // namespace clusterplot
