#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "clusterplot/config.hpp"
#include "clusterplot/optimizer.hpp"

namespace clusterplot {

inline constexpr const char* kManifestName = "manifest.txt";

struct ArtifactEntry {
  std::string name;    // relative to the output directory
  std::string sha256;  // "-" for the manifest itself
};

struct Manifest {
  std::vector<ArtifactEntry> artifacts;  // sorted by name

  /// `<sha256>  <name>` lines.
  std::string text() const;
};

struct RunSummary {
  Manifest manifest;
  std::size_t num_anchors = 0;
  double initial_mae = 0.0;
  double best_mae = 0.0;
  OptimizeStatus status = OptimizeStatus::exhausted;
  std::size_t iterations_run = 0;
  std::vector<std::string> warnings;
};

std::string sha256_hex(std::string_view data);

/// Full pipeline: ingest, sub-clusters, high-dimensional relations,
/// embedding, optimisation, final geometry and rendering. Every artifact
/// goes to config.output_dir and is listed in the manifest. On failure the
/// files written so far are removed and the error is rethrown with the
/// stage name prefixed.
RunSummary run(const RunConfig& config);

/// Relations only: high-dimensional overlap and proximity matrices and
/// their heatmaps, the anchor dump and (optionally) the confusion matrix.
RunSummary measure(const RunConfig& config);

/// Re-renders a saved geometry dump into an SVG document.
std::string render_saved(const std::filesystem::path& geometry, const RenderConfig& config,
                         std::vector<std::string>* warnings = nullptr);

}  // namespace clusterplot
