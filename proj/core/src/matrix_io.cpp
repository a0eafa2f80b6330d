#include "clusterplot/matrix_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "clusterplot/error.hpp"

namespace clusterplot {

namespace {

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError(fmt::format("line {}: '{}' is not a number", line, s));
  return v;
}

std::size_t parse_index(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError(fmt::format("line {}: '{}' is not an index", line, s));
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::string join(std::span<const std::string> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

void append_loop(std::string& out, const Polygon& loop) {
  for (const auto& p : loop) out += fmt::format(",{},{}", p.x, p.y);
  out += '\n';
}

Polygon parse_loop(std::span<const std::string> fields, std::size_t line) {
  if (fields.size() % 2 != 0) throw DataError(fmt::format("line {}: odd number of coordinates", line));
  Polygon loop;
  for (std::size_t i = 0; i < fields.size(); i += 2)
    loop.push_back({parse_double(fields[i], line), parse_double(fields[i + 1], line)});
  return loop;
}

}  // namespace

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError(fmt::format("cannot write '{}'", path.string()));
  out << contents;
  if (!out.flush()) throw PipelineError(fmt::format("write to '{}' failed", path.string()));
}

std::string format_matrix(const Matrix& m, std::span<const std::string> names) {
  if (names.size() != m.cols())
    throw PipelineError(fmt::format("{} names for {} matrix columns", names.size(), m.cols()));
  std::string out = join(names) + '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out += fmt::format("{}{}", j ? "," : "", m(i, j));
    out += '\n';
  }
  return out;
}

NamedMatrix parse_matrix(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DataError("matrix file is empty");
  NamedMatrix nm;
  nm.names = split_commas(lines[0]);
  const std::size_t cols = nm.names.size();
  nm.values = Matrix(lines.size() - 1, cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_commas(lines[r]);
    if (fields.size() != cols)
      throw DataError(fmt::format("line {}: {} values, expected {}", r + 1, fields.size(), cols));
    for (std::size_t c = 0; c < cols; ++c) nm.values(r - 1, c) = parse_double(fields[c], r + 1);
  }
  return nm;
}

NamedMatrix read_matrix(const std::filesystem::path& path) { return parse_matrix(read_file(path)); }

std::string format_geometry(std::span<const BlobGeometry> blobs, std::span<const std::string> class_names) {
  std::string out = join(class_names) + '\n';
  for (const auto& b : blobs) {
    for (std::size_t l = 0; l < b.outline.size(); ++l) {
      out += fmt::format("outline,{},{}", b.label, l);
      append_loop(out, b.outline[l]);
    }
    for (std::size_t l = 0; l < b.shape.loops.size(); ++l) {
      out += fmt::format("boundary,{},{}", b.label, l);
      append_loop(out, b.shape.loops[l]);
    }
    for (std::size_t c = 0; c < b.cells.size(); ++c)
      for (std::size_t p = 0; p < b.cells[c].pieces.size(); ++p) {
        out += fmt::format("cell,{},{},{}", b.label, b.cell_anchor_ids[c], p);
        append_loop(out, b.cells[c].pieces[p]);
      }
  }
  return out;
}

GeometryDump parse_geometry(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DataError("geometry file is empty");
  GeometryDump dump;
  dump.class_names = split_commas(lines[0]);
  dump.blobs.resize(dump.class_names.size());
  for (std::size_t l = 0; l < dump.blobs.size(); ++l) dump.blobs[l].label = l;
  std::vector<std::map<std::size_t, std::size_t>> cell_slot(dump.blobs.size());

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::size_t line = r + 1;
    const auto fields = split_commas(lines[r]);
    const std::string& kind = fields[0];
    const bool is_cell = kind == "cell";
    const std::size_t head = is_cell ? 4 : 3;
    if (fields.size() < head) throw DataError(fmt::format("line {}: truncated record", line));
    const std::size_t label = parse_index(fields[1], line);
    if (label >= dump.blobs.size()) throw DataError(fmt::format("line {}: label {} out of range", line, label));
    BlobGeometry& blob = dump.blobs[label];
    Polygon loop = parse_loop(std::span(fields).subspan(head), line);
    if (kind == "outline") {
      blob.outline.push_back(std::move(loop));
    } else if (kind == "boundary") {
      blob.shape.loops.push_back(std::move(loop));
    } else if (is_cell) {
      const std::size_t anchor = parse_index(fields[2], line);
      auto [it, fresh] = cell_slot[label].try_emplace(anchor, blob.cells.size());
      if (fresh) {
        blob.cells.emplace_back();
        blob.cell_anchor_ids.push_back(anchor);
      }
      Cell& cell = blob.cells[it->second];
      cell.area += std::abs(signed_area(loop));
      cell.pieces.push_back(std::move(loop));
    } else {
      throw DataError(fmt::format("line {}: unknown record '{}'", line, kind));
    }
  }
  return dump;
}

GeometryDump read_geometry(const std::filesystem::path& path) { return parse_geometry(read_file(path)); }

}  // namespace clusterplot
