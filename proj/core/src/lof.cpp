#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/geometry.hpp"

namespace clusterplot {

std::vector<double> lof(std::span<const Point2> pts, std::size_t k, double epsilon) {
  const std::size_t n = pts.size();
  if (k == 0 || n <= k) throw PipelineError(fmt::format("LOF: need more than k={} points, got {}", k, n));

  std::vector<double> kdist2(n);
  std::vector<std::vector<std::size_t>> hood(n);
  std::vector<double> d2(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<double> others;
    others.reserve(n - 1);
    for (std::size_t o = 0; o < n; ++o) {
      d2[o] = squared_distance(pts[p], pts[o]);
      if (o != p) others.push_back(d2[o]);
    }
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k - 1), others.end());
    kdist2[p] = others[k - 1];
    for (std::size_t o = 0; o < n; ++o)
      if (o != p && d2[o] <= kdist2[p]) hood[p].push_back(o);
  }

  std::vector<double> lrd(n);
  for (std::size_t p = 0; p < n; ++p) {
    double reach = 0.0;
    for (const auto o : hood[p])
      reach += std::sqrt(std::max(kdist2[o], squared_distance(pts[p], pts[o])));
    reach /= static_cast<double>(hood[p].size());
    lrd[p] = 1.0 / std::max(reach, epsilon);
  }

  std::vector<double> score(n);
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (const auto o : hood[p]) s += lrd[o];
    score[p] = s / (static_cast<double>(hood[p].size()) * lrd[p]);
  }
  return score;
}

}  // namespace clusterplot
