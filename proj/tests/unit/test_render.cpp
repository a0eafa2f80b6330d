#include <doctest.h>

#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "clusterplot/error.hpp"
#include "clusterplot/render.hpp"

using namespace clusterplot;

namespace {

BlobGeometry square_blob(std::size_t label, double x0, double y0, double side) {
  BlobGeometry b;
  b.label = label;
  b.outline = {{{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}}};
  return b;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Parsed by an independent XML reader; throws on malformed documents.
boost::property_tree::ptree parse_xml(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(in, tree);
  return tree;
}

const std::vector<std::string> kNames{"alpha", "beta"};

}  // namespace

TEST_CASE("two blobs give two fills, two strokes and a legend") {
  const std::vector<BlobGeometry> blobs{square_blob(0, 10, 10, 30), square_blob(1, 50, 50, 40)};
  const auto svg = render_clusterplot(blobs, kNames, RenderConfig{});
  CHECK(count(svg, "class=\"fill\"") == 2);
  CHECK(count(svg, "class=\"stroke\"") == 2);
  CHECK(count(svg, "<g id=\"legend\"") == 1);
  CHECK(svg.find(">alpha</text>") != std::string::npos);
  CHECK(svg.find(">beta</text>") != std::string::npos);
  CHECK_NOTHROW(parse_xml(svg));

  RenderConfig quiet;
  quiet.legend = false;
  CHECK(render_clusterplot(blobs, kNames, quiet).find("legend") == std::string::npos);
}

TEST_CASE("stroke width is the configured fraction of the canvas") {
  RenderConfig c;
  c.canvas_px = 1000;
  c.stroke_width_frac = 0.008;
  const std::vector<BlobGeometry> blobs{square_blob(0, 0, 0, 10)};
  const auto svg = render_clusterplot(blobs, kNames, c);
  CHECK(svg.find("stroke-width=\"8\"") != std::string::npos);
  CHECK(svg.find("width=\"1000.000\"") != std::string::npos);
}

TEST_CASE("rendering is byte-identical on repeat") {
  const std::vector<BlobGeometry> blobs{square_blob(0, 10, 10, 30), square_blob(1, 20, 20, 40)};
  CHECK(render_clusterplot(blobs, kNames, RenderConfig{}) == render_clusterplot(blobs, kNames, RenderConfig{}));
}

TEST_CASE("fills come largest first and every stroke follows every fill") {
  const std::vector<BlobGeometry> blobs{square_blob(0, 10, 10, 10), square_blob(1, 20, 20, 50)};
  const auto svg = render_clusterplot(blobs, kNames, RenderConfig{});
  const auto first_fill = svg.find("class=\"fill\"");
  CHECK(svg.find("class=\"fill\" data-label=\"1\"") == first_fill);
  CHECK(svg.rfind("class=\"fill\"") < svg.find("class=\"stroke\""));
  // Strokes in label order.
  CHECK(svg.find("class=\"stroke\" data-label=\"0\"") < svg.find("class=\"stroke\" data-label=\"1\""));
}

TEST_CASE("path data uses absolute commands only") {
  BlobGeometry b = square_blob(0, 10, 10, 30);
  b.outline.push_back({{20, 20}, {20, 30}, {30, 30}, {30, 20}});  // hole, clockwise
  const std::vector<BlobGeometry> blobs{b};
  const auto svg = render_clusterplot(blobs, kNames, RenderConfig{});
  const std::regex d_attr(" d=\"([^\"]*)\"");
  std::size_t paths = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), d_attr), end; it != end; ++it) {
    ++paths;
    const std::string d = (*it)[1];
    CHECK(d.find_first_not_of("MLZ0123456789.- ") == std::string::npos);
    CHECK(count(d, "M") == 2);  // both loops in one path
  }
  CHECK(paths == 2);
}

TEST_CASE("blobs without outlines are skipped with a warning") {
  std::vector<BlobGeometry> blobs{square_blob(0, 0, 0, 10), BlobGeometry{}};
  blobs[1].label = 1;
  std::vector<std::string> warnings;
  const auto svg = render_clusterplot(blobs, kNames, RenderConfig{}, &warnings);
  CHECK(count(svg, "class=\"fill\"") == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("label 1") != std::string::npos);
  CHECK_THROWS_AS(render_clusterplot(std::vector<BlobGeometry>{}, kNames, RenderConfig{}), PipelineError);
}

TEST_CASE("palette colours cycle by label") {
  RenderConfig c;
  CHECK(c.color(0) == "#1f77b4");
  CHECK(c.color(1) == "#ff7f0e");
  CHECK(c.color(10) == "#1f77b4");
  c.palette = {"#000000"};
  CHECK(c.color(3) == "#000000");
  c.palette = {"red"};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("colour parsing and formatting") {
  const Rgb c = parse_hex_color("#21918c");
  CHECK(c.r == doctest::Approx(0x21 / 255.0));
  CHECK(to_hex(c) == "#21918c");
  CHECK_THROWS_AS(parse_hex_color("21918c"), ConfigError);
  CHECK_THROWS_AS(parse_hex_color("#21918g"), ConfigError);
}

TEST_CASE("colormap endpoints and midpoint") {
  CHECK(to_hex(colormap("viridis", 0.0)) == "#440154");
  CHECK(to_hex(colormap("viridis", 0.5)) == "#21918c");
  CHECK(to_hex(colormap("viridis", 1.0)) == "#fde725");
  CHECK(to_hex(colormap("viridis", 7.0)) == "#fde725");
  CHECK(to_hex(colormap("viridis", -1.0)) == "#440154");
  CHECK(to_hex(colormap("greys", 0.0)) != to_hex(colormap("greys", 1.0)));
}

TEST_CASE("identity heatmap") {
  Matrix eye(2, 2, 0.0);
  eye(0, 0) = eye(1, 1) = 1.0;
  const auto svg = render_heatmap(eye, kNames, RenderConfig{}, "overlap");
  CHECK(count(svg, "class=\"cell\"") == 4);
  CHECK(svg.find("data-row=\"0\" data-col=\"0\"") != std::string::npos);
  const std::regex cell("class=\"cell\" data-row=\"(\\d)\" data-col=\"(\\d)\"[^>]*fill=\"(#[0-9a-f]{6})\"");
  std::size_t seen = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), cell), end; it != end; ++it, ++seen) {
    const bool diagonal = (*it)[1] == (*it)[2];
    CHECK((*it)[3] == (diagonal ? "#fde725" : "#440154"));
  }
  CHECK(seen == 4);
  CHECK_NOTHROW(parse_xml(svg));
}

TEST_CASE("heatmap annotations use two decimals") {
  Matrix m(2, 2, 0.0);
  m(0, 1) = 0.456;
  m(1, 0) = 0.5;
  const auto svg = render_heatmap(m, kNames, RenderConfig{});
  CHECK(svg.find(">0.46</text>") != std::string::npos);
  CHECK(svg.find("fill=\"#21918c\"") != std::string::npos);
  CHECK_THROWS_AS(render_heatmap(Matrix(2, 3, 0.0), kNames, RenderConfig{}), PipelineError);
}

TEST_CASE("class names are escaped") {
  const std::vector<std::string> names{"a<b", "c&d"};
  const std::vector<BlobGeometry> blobs{square_blob(0, 0, 0, 10), square_blob(1, 20, 0, 10)};
  const auto svg = render_clusterplot(blobs, names, RenderConfig{});
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("c&amp;d") != std::string::npos);
  CHECK_NOTHROW(parse_xml(svg));
}
