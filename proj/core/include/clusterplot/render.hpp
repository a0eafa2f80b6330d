#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "clusterplot/geometry.hpp"
#include "clusterplot/matrix.hpp"

namespace clusterplot {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

struct RenderConfig {
  std::size_t canvas_px = 800;
  std::vector<std::string> palette = default_palette();
  double fill_opacity = 0.25;
  double stroke_width_frac = 0.004;
  bool legend = true;
  /// "viridis" or "greys".
  std::string heatmap_colormap = "viridis";

  void validate() const;
  /// palette[label mod palette size].
  const std::string& color(std::size_t label) const;

  static std::vector<std::string> default_palette();
};

/// Parses "#rrggbb".
Rgb parse_hex_color(const std::string& hex);
std::string to_hex(Rgb c);

/// Five-stop ramp, linear between stops, t clamped to [0, 1].
Rgb colormap(const std::string& name, double t);

/// Fills sorted by outline area (largest first), then strokes in label order, then
/// the legend. Blobs without an outline are skipped and reported through
/// `warnings` when given.
std::string render_clusterplot(std::span<const BlobGeometry> blobs, std::span<const std::string> class_names,
                               const RenderConfig& config, std::vector<std::string>* warnings = nullptr);

std::string render_heatmap(const Matrix& matrix, std::span<const std::string> class_names,
                           const RenderConfig& config, const std::string& title = {});

}  // namespace clusterplot
