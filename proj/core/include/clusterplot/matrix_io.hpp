#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clusterplot/geometry.hpp"
#include "clusterplot/matrix.hpp"

namespace clusterplot {

/// First line: comma-joined names; then one comma-joined row per line at
/// shortest round-trip precision.
std::string format_matrix(const Matrix& m, std::span<const std::string> names);

struct NamedMatrix {
  std::vector<std::string> names;
  Matrix values;
};

NamedMatrix parse_matrix(const std::string& text);
NamedMatrix read_matrix(const std::filesystem::path& path);

/// Text dump of final geometry. First line: class names; then records
///   outline,<label>,<loop>,x0,y0,x1,y1,...
///   boundary,<label>,<loop>,x0,y0,...
///   cell,<label>,<anchor>,<piece>,x0,y0,...
std::string format_geometry(std::span<const BlobGeometry> blobs, std::span<const std::string> class_names);

struct GeometryDump {
  std::vector<std::string> class_names;
  /// One entry per label; only label, outline, shape.loops and cells are filled.
  std::vector<BlobGeometry> blobs;
};

GeometryDump parse_geometry(const std::string& text);
GeometryDump read_geometry(const std::filesystem::path& path);

/// Whole-file helpers; throw DataError on I/O failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

std::vector<std::string> split_commas(std::string_view line);

}  // namespace clusterplot
