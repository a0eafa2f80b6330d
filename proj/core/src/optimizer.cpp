#include "clusterplot/optimizer.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/parallel.hpp"
#include "clusterplot/random.hpp"
#include "clusterplot/relations.hpp"

namespace clusterplot {

void OptimizeParams::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (!(learning_rate >= 0.0 && learning_rate < 1.0)) throw ConfigError("learning rate must lie in [0, 1)");
  if (!(delta >= 0.0)) throw ConfigError("delta must be non-negative");
  if (!(damp_factor > 0.0 && damp_factor < 1.0)) throw ConfigError("damp factor must lie in (0, 1)");
}

Point2 stepped_position(Point2 anchor_i, Point2 anchor_j, StepDirection direction, double learning_rate,
                        std::uint64_t seed) {
  Point2 d = anchor_i - anchor_j;
  if (d == Point2{}) {
    std::mt19937_64 rng(seed);
    const double angle = 2.0 * std::numbers::pi * uniform01(rng);
    d = {std::cos(angle), std::sin(angle)};
  }
  switch (direction) {
    case StepDirection::push: return anchor_i + learning_rate * d;
    case StepDirection::pull: return anchor_i - learning_rate * d;
    case StepDirection::none: break;
  }
  return anchor_i;
}

std::vector<Point2> step(std::vector<Point2> coords, std::size_t i, std::size_t j, StepDirection direction,
                         double learning_rate, std::uint64_t seed) {
  if (i == j) throw PipelineError("step: anchor pair must be distinct");
  coords.at(i) = stepped_position(coords[i], coords.at(j), direction, learning_rate, seed);
  return coords;
}

namespace {

class Measurer {
 public:
  Measurer(const SubClustering& sc, const GeometryParams& geometry, std::size_t k_overlap)
      : sc_(sc), geometry_(geometry), k_(k_overlap), counts_(scale_counts(sc.sizes, geometry.virtual_cap)),
        blobs_(sc.num_classes()), samples_(sc.num_classes()) {
    geometry_.validate();
    if (sc.num_anchors() > geometry.virtual_cap)
      throw ConfigError(fmt::format("virtual cap {} is below the anchor count {}", geometry.virtual_cap,
                                    sc.num_anchors()));
  }

  // Sampling streams are keyed by the label's anchor positions, so equal
  // geometry always yields equal virtual points.
  void rebuild_label(std::size_t label, std::span<const Point2> coords) {
    blobs_[label] = build_blob(label, coords, sc_, geometry_);
    std::uint64_t key = label;
    for (std::size_t a = sc_.class_begin[label]; a < sc_.class_begin[label + 1]; ++a)
      key = derive_seed(key, {std::bit_cast<std::uint64_t>(coords[a].x), std::bit_cast<std::uint64_t>(coords[a].y)});
    samples_[label] = sample_blob(blobs_[label], counts_, geometry_.seed, key);
  }

  void rebuild_all(std::span<const Point2> coords) {
    parallel_for(sc_.num_classes(), [&](std::size_t l) { rebuild_label(l, coords); });
  }

  LowDimMeasurement snapshot() const {
    LowDimMeasurement m;
    m.blobs = blobs_;
    for (const auto& s : samples_) m.virtual_points.append(s);
    const auto graph = build_knn(std::span<const Point2>(m.virtual_points.points), k_);
    m.anchor_overlap = anchor_overlap(graph, m.virtual_points.owner_anchor, sc_.num_anchors());
    m.label_overlap = label_overlap(graph, m.virtual_points.owner_label, sc_.num_classes());
    return m;
  }

 private:
  const SubClustering& sc_;
  GeometryParams geometry_;
  std::size_t k_;
  std::vector<std::size_t> counts_;
  std::vector<BlobGeometry> blobs_;
  std::vector<VirtualPointSet> samples_;
};

}  // namespace

LowDimMeasurement measure_lowdim(std::span<const Point2> coords, const SubClustering& sc,
                                 const GeometryParams& geometry, std::size_t k_overlap) {
  if (coords.size() != sc.num_anchors())
    throw PipelineError(fmt::format("{} coordinates for {} anchors", coords.size(), sc.num_anchors()));
  Measurer m(sc, geometry, k_overlap);
  m.rebuild_all(coords);
  return m.snapshot();
}

OptimizeResult optimize(std::vector<Point2> coords, const Matrix& high_overlap, const SubClustering& sc,
                        const OptimizeParams& params, const GeometryParams& geometry, std::size_t k_overlap,
                        const IterationObserver& observer) {
  params.validate();
  const std::size_t na = sc.num_anchors();
  if (high_overlap.rows() != na || high_overlap.cols() != na)
    throw PipelineError(fmt::format("high-dimensional overlap is {}x{}, expected {}x{}", high_overlap.rows(),
                                    high_overlap.cols(), na, na));
  if (coords.size() != na) throw PipelineError(fmt::format("{} coordinates for {} anchors", coords.size(), na));

  const auto include = [&](std::size_t i, std::size_t j) {
    return i != j && (!params.inter_label_only || sc.anchor_label[i] != sc.anchor_label[j]);
  };
  const std::uint64_t step_seed = module_seed(params.seed, "optimizer");

  Measurer measurer(sc, geometry, k_overlap);
  measurer.rebuild_all(coords);
  LowDimMeasurement current = measurer.snapshot();

  OptimizeResult result;
  result.initial = current;
  std::vector<Point2> best = coords;
  double best_mae = std::numeric_limits<double>::infinity();
  double rate = params.learning_rate;
  std::size_t stall = 0;
  auto& trace = result.trace;

  for (std::size_t iter = 1; iter <= params.iterations; ++iter) {
    if (observer) observer(iter, coords);
    const MaeResult loss = mae(high_overlap, current.anchor_overlap, include);
    if (iter == 1) trace.initial_mae = loss.value;
    if (loss.value < best_mae) {
      best_mae = loss.value;
      best = coords;
      trace.best_iteration = iter;
      stall = 0;
    } else if (++stall >= params.stall_patience) {
      // Damp on stalls; once the step has shrunk a thousandfold, restart it.
      rate *= params.damp_factor;
      if (rate < 1e-3 * params.learning_rate) rate = params.learning_rate;
      stall = 0;
    }

    TraceRecord rec;
    rec.iteration = iter;
    rec.mae = loss.value;
    rec.i = loss.row;
    rec.j = loss.col;
    if (loss.value <= params.delta) {
      trace.records.push_back(rec);
      trace.status = OptimizeStatus::converged;
      break;
    }
    rec.direction = high_overlap(loss.row, loss.col) <= current.anchor_overlap(loss.row, loss.col)
                        ? StepDirection::push
                        : StepDirection::pull;
    rec.step = rate;
    rec.distance_before = distance(coords[rec.i], coords[rec.j]);
    coords[rec.i] = stepped_position(coords[rec.i], coords[rec.j], rec.direction, rate,
                                     derive_seed(step_seed, {iter}));
    rec.distance_after = distance(coords[rec.i], coords[rec.j]);
    trace.records.push_back(rec);

    if (iter == params.iterations) break;
    if (params.lazy) measurer.rebuild_label(sc.anchor_label[rec.i], coords);
    else measurer.rebuild_all(coords);
    current = measurer.snapshot();
  }

  trace.best_mae = best_mae;
  result.coords = best;
  if (best == coords) {
    result.final_state = std::move(current);
  } else {
    measurer.rebuild_all(best);
    result.final_state = measurer.snapshot();
  }
  return result;
}

}  // namespace clusterplot
