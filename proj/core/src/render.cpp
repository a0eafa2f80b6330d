#include "clusterplot/render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "clusterplot/error.hpp"

namespace clusterplot {

namespace {

constexpr std::array<const char*, 5> kViridis = {"#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"};
constexpr std::array<const char*, 5> kGreys = {"#ffffff", "#d9d9d9", "#969696", "#525252", "#000000"};

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Avoids "-0.00" so that output does not depend on the sign of tiny values.
std::string num(double v) {
  if (std::fabs(v) < 0.0005) v = 0.0;
  return fmt::format("{:.3f}", v);
}

struct View {
  double scale = 1.0;
  double min_x = 0.0;
  double max_y = 0.0;
  double offset = 0.0;

  Point2 map(Point2 p) const { return {offset + (p.x - min_x) * scale, offset + (max_y - p.y) * scale}; }
};

// The canonical square, grown to include every outline, plus a 5% margin.
View make_view(std::span<const BlobGeometry> blobs, double canvas) {
  double lo_x = 0.0, lo_y = 0.0, hi_x = 100.0, hi_y = 100.0;
  for (const auto& b : blobs)
    for (const auto& loop : b.outline)
      for (const auto& p : loop) {
        lo_x = std::min(lo_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_x = std::max(hi_x, p.x);
        hi_y = std::max(hi_y, p.y);
      }
  const double side = std::max(hi_x - lo_x, hi_y - lo_y);
  View v;
  v.offset = 0.05 * canvas;
  v.scale = 0.9 * canvas / side;
  v.min_x = lo_x - 0.5 * (side - (hi_x - lo_x));
  v.max_y = hi_y + 0.5 * (side - (hi_y - lo_y));
  return v;
}

std::string path_data(const std::vector<Polygon>& loops, const View& view) {
  std::string d;
  for (const auto& loop : loops) {
    if (loop.size() < 3) continue;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Point2 q = view.map(loop[i]);
      d += fmt::format("{}{} {} ", i == 0 ? 'M' : 'L', num(q.x), num(q.y));
    }
    d += "Z ";
  }
  if (!d.empty()) d.pop_back();
  return d;
}

std::string header(double width, double height) {
  return fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
      num(width), num(height));
}

}  // namespace

std::vector<std::string> RenderConfig::default_palette() {
  return {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
}

void RenderConfig::validate() const {
  if (canvas_px < 16) throw ConfigError("canvas must be at least 16 pixels");
  if (palette.empty()) throw ConfigError("palette must not be empty");
  for (const auto& c : palette) parse_hex_color(c);
  if (!(fill_opacity >= 0.0 && fill_opacity <= 1.0)) throw ConfigError("fill opacity must lie in [0, 1]");
  if (!(stroke_width_frac > 0.0 && stroke_width_frac < 1.0)) throw ConfigError("stroke fraction must lie in (0, 1)");
  if (heatmap_colormap != "viridis" && heatmap_colormap != "greys")
    throw ConfigError(fmt::format("unknown colormap '{}'", heatmap_colormap));
}

const std::string& RenderConfig::color(std::size_t label) const { return palette[label % palette.size()]; }

Rgb parse_hex_color(const std::string& hex) {
  if (hex.size() != 7 || hex[0] != '#') throw ConfigError(fmt::format("bad colour '{}', expected #rrggbb", hex));
  std::array<int, 6> d{};
  for (std::size_t i = 0; i < 6; ++i) {
    d[i] = hex_digit(hex[i + 1]);
    if (d[i] < 0) throw ConfigError(fmt::format("bad colour '{}', expected #rrggbb", hex));
  }
  return {(d[0] * 16 + d[1]) / 255.0, (d[2] * 16 + d[3]) / 255.0, (d[4] * 16 + d[5]) / 255.0};
}

std::string to_hex(Rgb c) {
  const auto byte = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return fmt::format("#{:02x}{:02x}{:02x}", byte(c.r), byte(c.g), byte(c.b));
}

Rgb colormap(const std::string& name, double t) {
  const auto& stops = name == "greys" ? kGreys : kViridis;
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * (stops.size() - 1);
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), stops.size() - 2);
  const double f = s - static_cast<double>(i);
  const Rgb a = parse_hex_color(stops[i]);
  const Rgb b = parse_hex_color(stops[i + 1]);
  return {a.r + f * (b.r - a.r), a.g + f * (b.g - a.g), a.b + f * (b.b - a.b)};
}

std::string render_clusterplot(std::span<const BlobGeometry> blobs, std::span<const std::string> class_names,
                               const RenderConfig& config, std::vector<std::string>* warnings) {
  config.validate();
  if (blobs.empty()) throw PipelineError("nothing to render: no blobs");
  const double canvas = static_cast<double>(config.canvas_px);
  const View view = make_view(blobs, canvas);

  std::vector<std::size_t> drawable;
  std::vector<std::string> paths(blobs.size());
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    paths[b] = path_data(blobs[b].outline, view);
    if (paths[b].empty()) {
      if (warnings) warnings->push_back(fmt::format("label {} has an empty outline; skipped", blobs[b].label));
      continue;
    }
    drawable.push_back(b);
  }
  std::vector<double> area(blobs.size(), 0.0);
  for (std::size_t b : drawable)
    for (const auto& loop : blobs[b].outline) area[b] += signed_area(loop);
  std::vector<std::size_t> by_area = drawable;
  std::stable_sort(by_area.begin(), by_area.end(), [&](std::size_t a, std::size_t b) { return area[a] > area[b]; });
  std::vector<std::size_t> by_label = drawable;
  std::stable_sort(by_label.begin(), by_label.end(),
                   [&](std::size_t a, std::size_t b) { return blobs[a].label < blobs[b].label; });

  std::string out = header(canvas, canvas);
  out += "<g id=\"fills\">\n";
  for (std::size_t b : by_area)
    out += fmt::format("<path class=\"fill\" data-label=\"{}\" d=\"{}\" fill=\"{}\" fill-opacity=\"{}\" "
                       "fill-rule=\"evenodd\" stroke=\"none\"/>\n",
                       blobs[b].label, paths[b], config.color(blobs[b].label), num(config.fill_opacity));
  out += "</g>\n<g id=\"strokes\">\n";
  const double stroke = config.stroke_width_frac * canvas;
  for (std::size_t b : by_label)
    out += fmt::format("<path class=\"stroke\" data-label=\"{}\" d=\"{}\" fill=\"none\" stroke=\"{}\" "
                       "stroke-width=\"{}\" stroke-linejoin=\"round\"/>\n",
                       blobs[b].label, paths[b], config.color(blobs[b].label), fmt::format("{:g}", stroke));
  out += "</g>\n";

  if (config.legend) {
    const double font = std::max(10.0, canvas / 50.0);
    out += fmt::format("<g id=\"legend\" font-family=\"sans-serif\" font-size=\"{}\">\n", num(font));
    std::size_t row = 0;
    for (std::size_t b : by_label) {
      const std::size_t label = blobs[b].label;
      const std::string name = label < class_names.size() ? class_names[label] : fmt::format("class {}", label);
      const double y = 0.5 * font + 1.4 * font * static_cast<double>(row++);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"{}\"/>\n",
                         num(0.5 * font), num(y), num(font), num(font), config.color(label), config.color(label));
      out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(2.0 * font), num(y + 0.85 * font),
                         escape_xml(name));
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_heatmap(const Matrix& matrix, std::span<const std::string> class_names,
                           const RenderConfig& config, const std::string& title) {
  config.validate();
  const std::size_t m = matrix.rows();
  if (m == 0 || matrix.cols() != m) throw PipelineError("heatmap needs a non-empty square matrix");
  if (class_names.size() != m)
    throw PipelineError(fmt::format("heatmap has {} rows but {} class names", m, class_names.size()));

  const double canvas = static_cast<double>(config.canvas_px);
  const double margin = 0.2 * canvas;
  const double cell = (canvas - margin - 0.02 * canvas) / static_cast<double>(m);
  const double font = std::clamp(cell / 4.0, 6.0, canvas / 40.0);

  std::string out = header(canvas, canvas);
  out += fmt::format("<g font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"middle\">\n", num(font));
  if (!title.empty())
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(canvas / 2.0), num(0.05 * canvas),
                       escape_xml(title));
  for (std::size_t i = 0; i < m; ++i) {
    const double y = margin + cell * static_cast<double>(i);
    out += fmt::format("<text class=\"row-label\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
                       num(margin - 0.3 * font), num(y + cell / 2.0 + 0.35 * font), escape_xml(class_names[i]));
    const double x = margin + cell * static_cast<double>(i);
    out += fmt::format("<text class=\"col-label\" x=\"{}\" y=\"{}\">{}</text>\n", num(x + cell / 2.0),
                       num(margin - 0.5 * font), escape_xml(class_names[i]));
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double v = matrix(i, j);
      const Rgb c = colormap(config.heatmap_colormap, v);
      const double luminance = 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
      const double x = margin + cell * static_cast<double>(j);
      const double y = margin + cell * static_cast<double>(i);
      out += fmt::format("<rect class=\"cell\" data-row=\"{}\" data-col=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" "
                         "height=\"{}\" fill=\"{}\"/>\n",
                         i, j, num(x), num(y), num(cell), num(cell), to_hex(c));
      out += fmt::format("<text class=\"value\" x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", num(x + cell / 2.0),
                         num(y + cell / 2.0 + 0.35 * font), luminance > 0.5 ? "#000000" : "#ffffff",
                         std::isfinite(v) ? fmt::format("{:.2f}", v) : std::string("nan"));
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace clusterplot
