#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "clusterplot/geometry.hpp"
#include "clusterplot/matrix.hpp"
#include "clusterplot/point2.hpp"
#include "clusterplot/subclustering.hpp"

namespace clusterplot {

struct OptimizeParams {
  std::size_t iterations = 1000;
  double learning_rate = 0.05;
  double delta = 0.02;
  std::size_t stall_patience = 25;
  double damp_factor = 0.5;
  /// Restrict the argmax to anchor pairs of different labels.
  bool inter_label_only = false;
  /// Re-measure only the moved anchor's label (identical results, less work).
  bool lazy = false;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class StepDirection { none, push, pull };
enum class OptimizeStatus { converged, exhausted };

struct TraceRecord {
  std::size_t iteration = 0;
  double mae = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  StepDirection direction = StepDirection::none;
  double step = 0.0;             // learning rate in effect
  double distance_before = 0.0;  // |LA_i - LA_j| before the move
  double distance_after = 0.0;
};

struct OptimizationTrace {
  std::vector<TraceRecord> records;
  OptimizeStatus status = OptimizeStatus::exhausted;
  double initial_mae = 0.0;
  double best_mae = 0.0;
  std::size_t best_iteration = 0;
};

/// New position of anchor i after one push (away from j, distance x(1+l))
/// or pull (towards j, distance x(1-l)). Coincident anchors use a unit
/// direction at an angle drawn from `seed`.
Point2 stepped_position(Point2 anchor_i, Point2 anchor_j, StepDirection direction, double learning_rate,
                        std::uint64_t seed = 0);

/// Moves coords[i] only.
std::vector<Point2> step(std::vector<Point2> coords, std::size_t i, std::size_t j, StepDirection direction,
                         double learning_rate, std::uint64_t seed = 0);

struct LowDimMeasurement {
  std::vector<BlobGeometry> blobs;
  VirtualPointSet virtual_points;
  Matrix anchor_overlap;  // LMA^O, N_A x N_A
  Matrix label_overlap;   // M x M
};

/// Low-dimensional overlap: blobs per label, virtual points spread in the
/// Voronoi cells with counts scaled from sub-cluster sizes, and the
/// K_O-NN anchor overlap of the pooled virtual points. Sampling streams
/// depend on (seed, label, anchor positions), so the result is a function of
/// the embedding alone.
LowDimMeasurement measure_lowdim(std::span<const Point2> coords, const SubClustering& sc,
                                 const GeometryParams& geometry, std::size_t k_overlap);

struct OptimizeResult {
  std::vector<Point2> coords;         // best-MAE embedding
  OptimizationTrace trace;
  LowDimMeasurement initial;          // measurement of the starting embedding
  LowDimMeasurement final_state;      // measurement of the returned embedding
};

using IterationObserver = std::function<void(std::size_t iteration, std::span<const Point2> coords)>;

/// Greedy push/pull loop minimising the maximum absolute difference between
/// the high- and low-dimensional anchor overlap matrices. Self pairs (i, i)
/// are excluded from the loss since they have no direction.
OptimizeResult optimize(std::vector<Point2> coords, const Matrix& high_overlap, const SubClustering& sc,
                        const OptimizeParams& params, const GeometryParams& geometry, std::size_t k_overlap,
                        const IterationObserver& observer = {});

}  // namespace clusterplot
