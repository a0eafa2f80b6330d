#include "clusterplot/embedding.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "clusterplot/error.hpp"

namespace clusterplot {

void EmbedSpec::validate() const {
  const bool has_path = !external_path.empty();
  if ((backend == EmbedBackend::external) != has_path)
    throw ConfigError("external coordinates path is required for, and only for, --embed external");
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

void fix_sign(std::vector<double>& v) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (!v.empty() && v[arg] < 0.0)
    for (auto& x : v) x = -x;
}

std::vector<double> multiply(const Matrix& a, std::span<const double> v) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const auto row = a.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return out;
}

}  // namespace

std::vector<EigenPair> top_eigenpairs(const Matrix& sym, std::size_t count, double tolerance,
                                      std::size_t max_iterations) {
  const std::size_t n = sym.rows();
  assert(sym.cols() == n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += std::abs(sym(i, i));
  const double scale = std::max(trace, std::numeric_limits<double>::min());

  std::vector<EigenPair> found;
  for (std::size_t c = 0; c < std::min(count, n); ++c) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.3 * static_cast<double>(i) + 0.7 * static_cast<double>(c + 1));

    auto deflate = [&](std::vector<double>& w) {
      for (const auto& e : found) {
        double p = 0.0;
        for (std::size_t i = 0; i < n; ++i) p += e.vector[i] * w[i];
        for (std::size_t i = 0; i < n; ++i) w[i] -= p * e.vector[i];
      }
    };
    deflate(v);
    double nv = norm(v);
    if (nv == 0.0) {
      v.assign(n, 0.0);
      v[c] = 1.0;
      deflate(v);
      nv = norm(v);
    }
    for (auto& x : v) x /= nv;

    EigenPair pair;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
      auto w = multiply(sym, v);
      deflate(w);
      double lambda = 0.0;
      for (std::size_t i = 0; i < n; ++i) lambda += v[i] * w[i];
      double residual = 0.0;
      for (std::size_t i = 0; i < n; ++i) residual += (w[i] - lambda * v[i]) * (w[i] - lambda * v[i]);
      residual = std::sqrt(residual);
      pair.value = lambda;
      pair.iterations = it;
      const double nw = norm(w);
      if (residual <= tolerance * scale || nw <= tolerance * scale) break;
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    fix_sign(v);
    pair.vector = std::move(v);
    found.push_back(std::move(pair));
  }
  return found;
}

namespace {

// Eigenvalues at or below this fraction of the trace count as zero.
constexpr double kRankTolerance = 1e-10;

Matrix centered(const Matrix& x) {
  Matrix c = x;
  for (std::size_t k = 0; k < x.cols(); ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, k);
    mean /= static_cast<double>(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) c(i, k) -= mean;
  }
  return c;
}

void require_anchors(const Matrix& anchors) {
  if (anchors.rows() < 3)
    throw DataError(fmt::format("embedding needs at least 3 anchors, got {}", anchors.rows()));
}

RawEmbedding finish_from_scores(std::size_t n, const std::vector<std::vector<double>>& scores, bool deficient) {
  RawEmbedding out;
  out.rank_deficient = deficient;
  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.coords[i] = {scores[0][i], scores[1][i]};
  return out;
}

}  // namespace

RawEmbedding pca_2d(const Matrix& anchors) {
  require_anchors(anchors);
  const std::size_t n = anchors.rows();
  const std::size_t d = anchors.cols();
  const Matrix xc = centered(anchors);
  const double denom = static_cast<double>(n - 1);

  // Loadings come from the d x d covariance, or via the n x n Gram matrix
  // when that is smaller (v = Xc^T u / |Xc^T u|).
  std::vector<std::vector<double>> loadings;
  std::vector<double> values;
  double trace = 0.0;
  if (d <= n) {
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += xc(i, a) * xc(i, b);
        cov(a, b) = cov(b, a) = s / denom;
      }
    for (std::size_t a = 0; a < d; ++a) trace += cov(a, a);
    for (auto& e : top_eigenpairs(cov, 2)) {
      values.push_back(e.value);
      loadings.push_back(std::move(e.vector));
    }
  } else {
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) gram(i, j) = gram(j, i) = std::inner_product(
                                              xc.row(i).begin(), xc.row(i).end(), xc.row(j).begin(), 0.0) / denom;
    for (std::size_t i = 0; i < n; ++i) trace += gram(i, i);
    for (auto& e : top_eigenpairs(gram, 2)) {
      std::vector<double> v(d, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) v[k] += xc(i, k) * e.vector[i];
      const double nv = norm(v);
      if (nv > 0.0)
        for (auto& x : v) x /= nv;
      fix_sign(v);
      values.push_back(e.value);
      loadings.push_back(std::move(v));
    }
  }

  const bool deficient = !(values[1] > kRankTolerance * trace);
  std::vector<std::vector<double>> scores(2, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < 2; ++c) {
    if (c == 1 && deficient) break;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += xc(i, k) * loadings[c][k];
      scores[c][i] = s;
    }
  }
  return finish_from_scores(n, scores, deficient);
}

RawEmbedding mds_2d(const Matrix& anchors) {
  require_anchors(anchors);
  const std::size_t n = anchors.rows();
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      b(i, j) = b(j, i) = squared_distance(anchors.row(i), anchors.row(j));
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += b(i, j);
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = -0.5 * (b(i, j) - row_mean[i] - row_mean[j] + grand);
  for (std::size_t i = 0; i < n; ++i) trace += b(i, i);

  const auto pairs = top_eigenpairs(b, 2);
  // Double-centred Euclidean distances give a PSD Gram matrix.
  assert(pairs[0].value >= -kRankTolerance * std::max(trace, 1.0));
  const bool deficient = !(pairs[1].value > kRankTolerance * trace);
  std::vector<std::vector<double>> scores(2, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < 2; ++c) {
    if (c == 1 && deficient) break;
    const double s = std::sqrt(std::max(0.0, pairs[c].value));
    for (std::size_t i = 0; i < n; ++i) scores[c][i] = pairs[c].vector[i] * s;
  }
  return finish_from_scores(n, scores, deficient);
}

std::vector<Point2> import_coords(const std::filesystem::path& path, std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::vector<Point2> coords(expected);
  std::vector<char> seen(expected, 0);
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    double vals[3];
    std::size_t start = 0;
    for (int f = 0; f < 3; ++f) {
      const auto end = f < 2 ? line.find(',', start) : line.size();
      if (end == std::string::npos)
        throw DataError(fmt::format("'{}' line {}: expected id,x,y", path.string(), lineno));
      std::string cell = line.substr(start, end - start);
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), vals[f]);
      if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw DataError(fmt::format("'{}' line {}: cannot parse '{}'", path.string(), lineno, cell));
      start = end + 1;
    }
    if (!std::isfinite(vals[1]) || !std::isfinite(vals[2]))
      throw DataError(fmt::format("'{}' line {}: non-finite coordinate", path.string(), lineno));
    if (vals[0] < 0 || vals[0] != std::floor(vals[0]) || vals[0] >= static_cast<double>(expected))
      throw DataError(fmt::format("'{}' line {}: anchor id {} out of range [0,{})", path.string(), lineno,
                                  vals[0], expected));
    const auto id = static_cast<std::size_t>(vals[0]);
    if (seen[id]) throw DataError(fmt::format("'{}' line {}: duplicate anchor id {}", path.string(), lineno, id));
    seen[id] = 1;
    coords[id] = {vals[1], vals[2]};
    ++rows;
  }
  if (rows != expected)
    throw DataError(fmt::format("'{}': {} coordinate rows for {} anchors", path.string(), rows, expected));
  return coords;
}

AnchorEmbedding to_canonical(std::span<const Point2> raw) {
  if (raw.empty()) throw DataError("cannot canonicalise an empty embedding");
  double x0 = raw[0].x, x1 = raw[0].x, y0 = raw[0].y, y1 = raw[0].y;
  for (const auto& p : raw) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw DataError("embedding contains non-finite coordinates");
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double extent = std::max(x1 - x0, y1 - y0);
  if (!(extent > 0.0)) throw DataError("all embedded anchors coincide");
  AnchorEmbedding out;
  out.frame.scale = kCanonicalExtent / extent;
  out.frame.center = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  out.coords.reserve(raw.size());
  for (const auto& p : raw) out.coords.push_back(out.frame.apply(p));
  return out;
}

AnchorEmbedding embed_anchors(const Matrix& anchors, const EmbedSpec& spec, bool* rank_deficient) {
  spec.validate();
  RawEmbedding raw;
  switch (spec.backend) {
    case EmbedBackend::pca: raw = pca_2d(anchors); break;
    case EmbedBackend::mds: raw = mds_2d(anchors); break;
    case EmbedBackend::external: raw.coords = import_coords(spec.external_path, anchors.rows()); break;
  }
  if (rank_deficient) *rank_deficient = raw.rank_deficient;
  return to_canonical(raw.coords);
}

}  // namespace clusterplot
