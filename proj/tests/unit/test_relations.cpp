#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "clusterplot/error.hpp"
#include "clusterplot/parallel.hpp"
#include "clusterplot/relations.hpp"
#include "clusterplot/toy.hpp"
#include "oracles.hpp"

using namespace clusterplot;

namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(xs.size(), 1);
  std::size_t i = 0;
  for (const double x : xs) m(i++, 0) = x;
  return m;
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  std::size_t i = 0;
  for (const auto& row : r) {
    std::size_t j = 0;
    for (const double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

std::vector<std::vector<std::uint32_t>> lists(const KnnGraph& g) {
  std::vector<std::vector<std::uint32_t>> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto n = g.neighbors(i);
    out[i].assign(n.begin(), n.end());
  }
  return out;
}

void check_stochastic(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      CHECK(m(i, j) >= 0.0);
      CHECK(m(i, j) <= 1.0);
      s += m(i, j);
    }
    CHECK(std::abs(s - 1.0) <= 1e-9);
  }
}

std::vector<Point2> grid_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> u(0, 12);
  std::vector<Point2> out(n);
  for (auto& p : out) p = {static_cast<double>(u(rng)), static_cast<double>(u(rng))};
  return out;
}

}  // namespace

TEST_CASE("small KNN examples") {
  const auto g = build_knn(column({0, 1, 3}), 1);
  CHECK(lists(g) == std::vector<std::vector<std::uint32_t>>{{1}, {0}, {1}});
  const std::vector<std::size_t> groups{0, 1};
  const auto h = build_knn(column({0, 5}), 1, groups);
  CHECK(lists(h) == std::vector<std::vector<std::uint32_t>>{{1}, {0}});
  CHECK_FALSE(h.truncated());
}

TEST_CASE("KNN equals the brute-force oracle in high dimension") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ds = oracle::random_dataset(rng, 150, 3 + trial, 3);
    for (const std::size_t k : {1, 4, 10}) {
      CHECK(lists(build_knn(ds.points, k)) == oracle::knn(ds.points, k));
      CHECK(lists(build_knn(ds.points, k, ds.labels)) == oracle::knn(ds.points, k, ds.labels));
    }
  }
}

TEST_CASE("planar spatial index equals brute force, ties included") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 6; ++trial) {
    const auto pts = trial % 2 ? oracle::random_points(rng, 200) : grid_points(rng, 200);
    for (const std::size_t k : {1, 5, 10}) {
      const auto fast = build_knn(std::span<const Point2>(pts), k, {}, KnnMethod::spatial_index);
      const auto slow = build_knn(std::span<const Point2>(pts), k, {}, KnnMethod::brute_force);
      CHECK(fast == slow);
      CHECK(lists(fast) == oracle::knn(std::span<const Point2>(pts), k));
    }
  }
}

TEST_CASE("neighbour lists are sorted with id tie-break and no self edges") {
  std::mt19937_64 rng(33);
  const auto pts = grid_points(rng, 300);
  const auto g = build_knn(std::span<const Point2>(pts), 8);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto n = g.neighbors(i);
    const auto d = g.distances2(i);
    REQUIRE(n.size() == 8);
    for (std::size_t t = 0; t < n.size(); ++t) {
      CHECK(n[t] != i);
      if (t > 0) CHECK((d[t - 1] < d[t] || (d[t - 1] == d[t] && n[t - 1] < n[t])));
    }
  }
}

TEST_CASE("truncated out-degree when candidates run out") {
  const auto g = build_knn(column({0, 1, 2}), 5);
  CHECK(g.truncated());
  for (std::size_t i = 0; i < 3; ++i) CHECK(g.neighbors(i).size() == 2);
}

TEST_CASE("KNN does not depend on thread count") {
  std::mt19937_64 rng(34);
  const auto ds = oracle::random_dataset(rng, 400, 6, 2);
  set_thread_count(1);
  const auto a = build_knn(ds.points, 7);
  set_thread_count(3);
  const auto b = build_knn(ds.points, 7);
  set_thread_count(1);
  CHECK(a == b);
}

TEST_CASE("anchor overlap examples") {
  const std::vector<std::size_t> assign{0, 0, 1, 1};
  const auto m = anchor_overlap(build_knn(rows({{0, 0}, {0, 1}, {10, 0}, {10, 1}}), 1), assign, 2);
  CHECK(m == rows({{1, 0}, {0, 1}}));
  const std::vector<std::size_t> two{0, 1};
  CHECK(anchor_overlap(build_knn(rows({{0, 0}, {1, 0}}), 1), two, 2) == rows({{0, 1}, {1, 0}}));
}

TEST_CASE("overlap matrices match oracle edge fractions") {
  std::mt19937_64 rng(35);
  const auto ds = oracle::random_dataset(rng, 300, 4, 3);
  std::vector<std::size_t> assign(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) assign[i] = ds.labels[i] * 4 + i % 4;
  const auto g = build_knn(ds.points, 10);
  const auto nbrs = oracle::knn(ds.points, 10);
  const auto ma = anchor_overlap(g, assign, 12);
  const auto ml = label_overlap(g, ds.labels, 3);
  const auto ref_a = oracle::edge_fractions(nbrs, assign, 12);
  const auto ref_l = oracle::edge_fractions(nbrs, ds.labels, 3);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) CHECK(ma(i, j) == doctest::Approx(ref_a(i, j)).epsilon(1e-12));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(ml(i, j) - ref_l(i, j)) <= 1e-12);
  check_stochastic(ma);
  check_stochastic(ml);

  // Label overlap is the label aggregation of the anchor-level edge counts.
  const auto counts = edge_counts(g, assign, 12);
  Matrix agg(3, 3);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) agg(i / 4, j / 4) += counts(i, j);
  const auto agg_n = row_normalize(agg);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(agg_n(i, j) - ml(i, j)) <= 1e-12);
}

TEST_CASE("label overlap of separated and interleaved classes") {
  ToyParams tp;
  tp.n = 400;
  tp.classes = 2;
  tp.separation = 30.0;
  const auto far = make_gaussians(tp, 3);
  CHECK(label_overlap(build_knn(far.points, 3), far.labels, 2) == rows({{1, 0}, {0, 1}}));

  tp.n = 4000;
  tp.separation = 0.0;
  const auto mixed = make_gaussians(tp, 4);
  const auto ml = label_overlap(build_knn(mixed.points, 10), mixed.labels, 2);
  CHECK(std::abs(ml(0, 1) - 0.5) <= 0.05);
  CHECK(std::abs(ml(1, 0) - 0.5) <= 0.05);
}

TEST_CASE("proximity examples") {
  const std::vector<std::size_t> labels3{0, 1, 2};
  CHECK(proximity(column({0, 1, 2}), labels3, 3, 1) == rows({{0, 1, 0}, {1, 0, 0}, {0, 1, 0}}));
  std::mt19937_64 rng(36);
  const auto pts = oracle::random_points(rng, 20);
  std::vector<std::size_t> labels2(20);
  for (std::size_t i = 0; i < 20; ++i) labels2[i] = i % 2;
  CHECK(proximity(std::span<const Point2>(pts), labels2, 2, 1) == rows({{0, 1}, {1, 0}}));
}

TEST_CASE("proximity is stochastic with a zero diagonal") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ds = oracle::random_dataset(rng, 60, 3, 4);
    const auto p = proximity(ds.points, ds.labels, 4, 5);
    check_stochastic(p);
    for (std::size_t i = 0; i < 4; ++i) CHECK(p(i, i) == 0.0);
    const auto ref = oracle::edge_fractions(oracle::knn(ds.points, 5, ds.labels), ds.labels, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(p(i, j) - ref(i, j)) <= 1e-12);
  }
}

TEST_CASE("matrices are invariant to point order without ties") {
  std::mt19937_64 rng(38);
  const auto ds = oracle::random_dataset(rng, 200, 3, 3);
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix shuffled(ds.size(), ds.dim());
  std::vector<std::size_t> labels(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) shuffled(i, j) = ds.points(perm[i], j);
    labels[i] = ds.labels[perm[i]];
  }
  CHECK(label_overlap(build_knn(ds.points, 10), ds.labels, 3) == label_overlap(build_knn(shuffled, 10), labels, 3));
}

TEST_CASE("maximum absolute error") {
  const auto h = rows({{0, 1}, {1, 0}});
  CHECK(mae(h, h).value == 0.0);
  CHECK(mae(h, h).row == 0);
  const auto r = mae(h, rows({{0, 0.5}, {1, 0}}));
  CHECK(r.value == 0.5);
  CHECK(r.row == 0);
  CHECK(r.col == 1);
  Matrix a(4, 4), b(4, 4);
  b(2, 3) = 1e-3;
  const auto s = mae(a, b);
  CHECK(s.value == 1e-3);
  CHECK(s.row == 2);
  CHECK(s.col == 3);
  const auto off = mae(rows({{1, 0}, {0, 1}}), rows({{0, 0.2}, {0, 0}}), [](std::size_t i, std::size_t j) { return i != j; });
  CHECK(off.value == doctest::Approx(0.2));
  CHECK(off.col == 1);
  CHECK_THROWS(mae(a, Matrix(3, 3)));
}

TEST_CASE("KNN confusion") {
  ToyParams tp;
  tp.n = 300;
  tp.classes = 3;
  tp.separation = 30.0;
  const auto far = make_gaussians(tp, 5);
  CHECK(knn_confusion(far, 10) == rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));

  // Swapping 10% of the labels between classes 0 and 1 plants that much confusion.
  auto swapped = far;
  std::size_t moved0 = 0, moved1 = 0;
  for (std::size_t i = 0; i < swapped.size(); ++i) {
    if (swapped.labels[i] == 0 && moved0 < 10) swapped.labels[i] = 1, ++moved0;
    else if (swapped.labels[i] == 1 && moved1 < 10 && i % 2 == 0) swapped.labels[i] = 0, ++moved1;
  }
  const auto c = knn_confusion(swapped, 10);
  check_stochastic(c);
  CHECK(std::abs(c(0, 1) - 0.1) <= 0.05);
  CHECK(std::abs(c(1, 0) - 0.1) <= 0.05);
}

TEST_CASE("relation parameter validation") {
  RelationParams p;
  p.k_overlap = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
