#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace oracle {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint>;  // clockwise outer, closed
using BMulti = bg::model::multi_polygon<BPolygon>;

namespace {

template <typename Dist>
std::vector<std::vector<std::uint32_t>> knn_impl(std::size_t n, std::size_t k, Dist dist,
                                                 std::span<const std::size_t> groups) {
  std::vector<std::vector<std::uint32_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (!groups.empty() && groups[i] == groups[j]) continue;
      all.emplace_back(dist(i, j), static_cast<std::uint32_t>(j));
    }
    std::sort(all.begin(), all.end());
    for (std::size_t t = 0; t < std::min(k, all.size()); ++t) out[i].push_back(all[t].second);
  }
  return out;
}

BMulti to_region(std::span<const Polygon> loops) {
  BMulti outers, holes;
  for (const auto& loop : loops) {
    if (loop.size() < 3) continue;
    BPolygon p;
    for (const auto& q : loop) p.outer().push_back(BPoint(q.x, q.y));
    p.outer().push_back(BPoint(loop.front().x, loop.front().y));
    double a = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const auto& u = loop[i];
      const auto& v = loop[(i + 1) % loop.size()];
      a += u.x * v.y - v.x * u.y;
    }
    bg::correct(p);
    BMulti single{p};
    BMulti merged;
    if (a > 0) {
      bg::union_(outers, single, merged);
      outers = std::move(merged);
    } else {
      bg::union_(holes, single, merged);
      holes = std::move(merged);
    }
  }
  if (holes.empty()) return outers;
  BMulti out;
  bg::difference(outers, holes, out);
  return out;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> knn(const Matrix& points, std::size_t k, std::span<const std::size_t> groups) {
  return knn_impl(
      points.rows(), k,
      [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t c = 0; c < points.cols(); ++c) s += (points(i, c) - points(j, c)) * (points(i, c) - points(j, c));
        return s;
      },
      groups);
}

std::vector<std::vector<std::uint32_t>> knn(std::span<const Point2> points, std::size_t k) {
  return knn_impl(
      points.size(), k,
      [&](std::size_t i, std::size_t j) {
        const double dx = points[i].x - points[j].x, dy = points[i].y - points[j].y;
        return dx * dx + dy * dy;
      },
      {});
}

Matrix edge_fractions(const std::vector<std::vector<std::uint32_t>>& nbrs, std::span<const std::size_t> group_of,
                      std::size_t groups) {
  Matrix m(groups, groups);
  for (std::size_t i = 0; i < nbrs.size(); ++i)
    for (const auto j : nbrs[i]) m(group_of[i], group_of[j]) += 1.0;
  for (std::size_t r = 0; r < groups; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < groups; ++c) s += m(r, c);
    if (s > 0)
      for (std::size_t c = 0; c < groups; ++c) m(r, c) /= s;
  }
  return m;
}

std::vector<double> lof(std::span<const Point2> pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);

  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> hood(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others.push_back(d[i][j]);
    std::sort(others.begin(), others.end());
    kdist[i] = others[k - 1];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && d[i][j] <= kdist[i]) hood[i].push_back(j);
  }
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto j : hood[i]) s += std::max(kdist[j], d[i][j]);
    lrd[i] = static_cast<double>(hood[i].size()) / s;
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto j : hood[i]) s += lrd[j];
    out[i] = s / static_cast<double>(hood[i].size()) / lrd[i];
  }
  return out;
}

Pca pca(const Matrix& points, std::size_t count) {
  const auto n = static_cast<Eigen::Index>(points.rows());
  const auto d = static_cast<Eigen::Index>(points.cols());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = points(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  Pca out;
  for (std::size_t c = 0; c < count; ++c) {
    const Eigen::Index idx = d - 1 - static_cast<Eigen::Index>(c);
    out.values.push_back(es.eigenvalues()(idx));
    std::vector<double> v(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] = es.eigenvectors()(j, idx);
    out.vectors.push_back(std::move(v));
  }
  return out;
}

LabeledDataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d, std::size_t m, double side) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::uniform_int_distribution<std::size_t> lab(0, m - 1);
  LabeledDataset ds;
  ds.points = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) ds.points(i, j) = u(rng);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = i < m ? i : lab(rng);
  for (std::size_t c = 0; c < m; ++c) ds.class_names.push_back("c" + std::to_string(c));
  return ds;
}

std::vector<Point2> random_points(std::mt19937_64& rng, std::size_t n, double side) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Point2> out(n);
  for (auto& p : out) p = {u(rng), u(rng)};
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double intersection_area(std::span<const Polygon> a, std::span<const Polygon> b) {
  BMulti out;
  bg::intersection(to_region(a), to_region(b), out);
  return bg::area(out);
}

double region_area(std::span<const Polygon> loops) { return bg::area(to_region(loops)); }

bool is_simple(const Polygon& loop) {
  const std::size_t n = loop.size();
  const auto orient = [](Point2 a, Point2 b, Point2 c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return (v > 0) - (v < 0);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      const Point2 a = loop[i], b = loop[(i + 1) % n], c = loop[j], d = loop[(j + 1) % n];
      const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
      if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return false;
    }
  return true;
}

}  // namespace oracle

namespace oracle {

clusterplot::SubClustering planar_subclustering(const std::vector<std::size_t>& anchor_label,
                                                std::vector<std::size_t> sizes) {
  clusterplot::SubClustering sc;
  const std::size_t n = anchor_label.size();
  if (sizes.empty()) sizes.assign(n, 1);
  sc.anchor_label = anchor_label;
  sc.sizes = sizes;
  sc.radii.assign(n, 0.0);
  sc.anchors = Matrix(n, 2);
  const std::size_t m = n == 0 ? 0 : *std::max_element(anchor_label.begin(), anchor_label.end()) + 1;
  sc.class_begin.assign(m + 1, 0);
  for (std::size_t a = 0; a < n; ++a) {
    if (a > 0 && anchor_label[a] < anchor_label[a - 1]) throw std::invalid_argument("labels must be grouped");
    sc.class_begin[anchor_label[a] + 1] = a + 1;
  }
  for (std::size_t c = 1; c <= m; ++c) sc.class_begin[c] = std::max(sc.class_begin[c], sc.class_begin[c - 1]);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t s = 0; s < sizes[a]; ++s) sc.assignment.push_back(a);
  sc.thresholds.assign(m, 1.0);
  return sc;
}

}  // namespace oracle
