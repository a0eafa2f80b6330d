#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "clusterplot/embedding.hpp"
#include "clusterplot/optimizer.hpp"
#include "clusterplot/relations.hpp"
#include "clusterplot/subclustering.hpp"
#include "clusterplot/toy.hpp"

namespace cp = clusterplot;

namespace {

std::vector<cp::Point2> random_points(std::size_t n) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<cp::Point2> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

void BM_KnnKdTree(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(cp::build_knn(pts, 10, {}, cp::KnnMethod::spatial_index));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnKdTree)->RangeMultiplier(4)->Range(1 << 10, 1 << 14)->Complexity();

void BM_KnnBruteForce(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(cp::build_knn(pts, 10, {}, cp::KnnMethod::brute_force));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KnnBruteForce)->RangeMultiplier(4)->Range(1 << 10, 1 << 12)->Complexity();

void BM_KnnHighDim(benchmark::State& state) {
  cp::ToyParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.dim = 64;
  const auto ds = cp::make_gaussians(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cp::build_knn(ds.points, 10));
}
BENCHMARK(BM_KnnHighDim)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_BirchFixedThreshold(benchmark::State& state) {
  cp::ToyParams p;
  p.n = static_cast<std::size_t>(state.range(0));
  p.dim = 16;
  const auto ds = cp::make_gaussians(p, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cp::birch_fit(ds.points, 3.0, 50));
}
BENCHMARK(BM_BirchFixedThreshold)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_SubclusterAuto(benchmark::State& state) {
  const auto ds = cp::make_hourglass(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(cp::subcluster_dataset(ds, {}));
}
BENCHMARK(BM_SubclusterAuto)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

// One optimizer re-measurement: blobs, virtual points and their KNN overlap.
void BM_MeasureLowdim(benchmark::State& state) {
  const auto ds = cp::make_hourglass(2000, 4);
  const auto sc = cp::subcluster_dataset(ds, {});
  const auto emb = cp::embed_anchors(sc.anchors, {});
  cp::GeometryParams gp;
  gp.virtual_cap = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cp::measure_lowdim(emb.coords, sc, gp, 10));
}
BENCHMARK(BM_MeasureLowdim)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
