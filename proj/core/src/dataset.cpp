#include "clusterplot/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <fmt/format.h>

#include "clusterplot/error.hpp"

namespace clusterplot {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_index(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (const auto l : labels)
    if (l < counts.size()) ++counts[l];
  return counts;
}

void LabeledDataset::validate() const {
  const std::size_t n = size();
  const std::size_t m = num_classes();
  if (labels.size() != n)
    throw DataError(fmt::format("{} labels for {} points", labels.size(), n));
  if (dim() < 2) throw DataError(fmt::format("need at least 2 feature columns, got {}", dim()));
  if (m < 2) throw DataError(fmt::format("need at least 2 classes, got {}", m));
  if (n < m) throw DataError(fmt::format("{} points cannot cover {} classes", n, m));
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] >= m)
      throw DataError(fmt::format("row {}: label {} out of range (M={})", i, labels[i], m));
  const auto counts = class_counts();
  for (std::size_t c = 0; c < m; ++c)
    if (counts[c] == 0) throw DataError(fmt::format("class '{}' has no points", class_names[c]));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      if (!std::isfinite(points(i, j)))
        throw DataError(fmt::format("row {}, column {}: non-finite value", i, j));
}

void encode_labels(const std::vector<std::string>& raw, std::vector<std::size_t>& labels,
                   std::vector<std::string>& class_names) {
  labels.clear();
  class_names.clear();
  std::unordered_map<std::string, std::size_t> index;
  labels.reserve(raw.size());
  for (const auto& name : raw) {
    auto [it, inserted] = index.try_emplace(name, class_names.size());
    if (inserted) class_names.push_back(name);
    labels.push_back(it->second);
  }
}

LabeledDataset load_text(const IngestSpec& spec) {
  const auto lines = read_lines(spec.path);
  if (lines.empty()) throw DataError(fmt::format("'{}': empty file", spec.path.string()));

  const auto first = split_commas(lines.front());
  const std::size_t ncols = first.size();
  if (ncols < 2) throw DataError(fmt::format("'{}' line 1: need a label and features", spec.path.string()));

  std::size_t label_col = ncols - 1;
  bool has_header = false;
  if (!spec.label_column.empty() && !is_index(spec.label_column)) {
    const auto it = std::find(first.begin(), first.end(), spec.label_column);
    if (it == first.end())
      throw DataError(fmt::format("'{}': label column '{}' not found in header",
                                  spec.path.string(), spec.label_column));
    label_col = static_cast<std::size_t>(it - first.begin());
    has_header = true;
  } else {
    if (!spec.label_column.empty()) {
      label_col = std::stoul(spec.label_column);
      if (label_col >= ncols)
        throw DataError(fmt::format("'{}': label column {} missing (line 1 has {} columns)",
                                    spec.path.string(), label_col, ncols));
    }
    for (std::size_t c = 0; c < ncols; ++c)
      if (c != label_col && !parse_double(first[c])) has_header = true;
  }

  const std::size_t begin = has_header ? 1 : 0;
  if (begin >= lines.size()) throw DataError(fmt::format("'{}': no data rows", spec.path.string()));

  const std::size_t n = lines.size() - begin;
  const std::size_t d = ncols - 1;
  std::vector<double> values;
  values.reserve(n * d);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);
  for (std::size_t r = begin; r < lines.size(); ++r) {
    const auto cells = split_commas(lines[r]);
    if (cells.size() != ncols)
      throw DataError(fmt::format("'{}' line {}: expected {} columns, found {}", spec.path.string(),
                                  r + 1, ncols, cells.size()));
    for (std::size_t c = 0; c < ncols; ++c) {
      if (c == label_col) {
        raw_labels.push_back(cells[c]);
        continue;
      }
      const auto v = parse_double(cells[c]);
      if (!v)
        throw DataError(fmt::format("'{}' line {}, column {}: cannot parse '{}' as a number",
                                    spec.path.string(), r + 1, c + 1, cells[c]));
      if (!std::isfinite(*v))
        throw DataError(fmt::format("'{}' line {}, column {}: non-finite value '{}'",
                                    spec.path.string(), r + 1, c + 1, cells[c]));
      values.push_back(*v);
    }
  }

  LabeledDataset ds;
  ds.points = Matrix(n, d, std::move(values));
  encode_labels(raw_labels, ds.labels, ds.class_names);
  ds.validate();
  return ds;
}

namespace {

template <class T>
T read_le(const unsigned char* p) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U u = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) u |= static_cast<U>(p[b]) << (8 * b);
  return std::bit_cast<T>(u);
}

}  // namespace

LabeledDataset load_binary(const IngestSpec& spec) {
  if (spec.sidecar_path.empty()) throw DataError("binary input requires a sidecar file");
  const auto sidecar_lines = read_lines(spec.sidecar_path);
  std::map<std::string, std::string> kv;
  for (std::size_t i = 0; i < sidecar_lines.size(); ++i) {
    const auto line = trim(sidecar_lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw DataError(fmt::format("'{}' line {}: expected key=value", spec.sidecar_path.string(), i + 1));
    kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  auto require = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw DataError(fmt::format("'{}': missing '{}='", spec.sidecar_path.string(), key));
    return it->second;
  };
  if (!is_index(require("n")) || !is_index(require("d")))
    throw DataError(fmt::format("'{}': n and d must be non-negative integers", spec.sidecar_path.string()));
  const std::size_t n = std::stoul(require("n"));
  const std::size_t d = std::stoul(require("d"));
  const auto& dtype = require("dtype");
  std::size_t width = 0;
  if (dtype == "f32") width = 4;
  else if (dtype == "f64") width = 8;
  else throw DataError(fmt::format("'{}': dtype must be f32 or f64, got '{}'", spec.sidecar_path.string(), dtype));

  std::ifstream in(spec.path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", spec.path.string()));
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != n * d * width)
    throw DataError(fmt::format("'{}': payload has {} bytes, expected n*d*width = {}*{}*{} = {}",
                                spec.path.string(), bytes.size(), n, d, width, n * d * width));

  std::vector<double> values(n * d);
  for (std::size_t i = 0; i < n * d; ++i) {
    const unsigned char* p = bytes.data() + i * width;
    values[i] = width == 4 ? static_cast<double>(read_le<float>(p)) : read_le<double>(p);
  }

  std::filesystem::path labels_path = spec.path;
  labels_path += ".labels";
  if (const auto it = kv.find("labels"); it != kv.end()) {
    labels_path = std::filesystem::path(it->second);
    if (labels_path.is_relative()) labels_path = spec.sidecar_path.parent_path() / labels_path;
  }
  std::vector<std::string> raw_labels;
  for (const auto& line : read_lines(labels_path)) raw_labels.emplace_back(trim(line));
  if (raw_labels.size() != n)
    throw DataError(fmt::format("'{}': {} labels for {} points", labels_path.string(), raw_labels.size(), n));

  LabeledDataset ds;
  ds.points = Matrix(n, d, std::move(values));
  encode_labels(raw_labels, ds.labels, ds.class_names);
  ds.validate();
  return ds;
}

LabeledDataset load_dataset(const IngestSpec& spec) {
  auto ds = spec.format == InputFormat::text ? load_text(spec) : load_binary(spec);
  return standardize(std::move(ds), spec.standardize);
}

void write_text(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (std::size_t j = 0; j < ds.dim(); ++j) out << 'f' << j << ',';
  out << "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dim(); ++j) out << fmt::format("{}", ds.points(i, j)) << ',';
    out << ds.class_names[ds.labels[i]] << '\n';
  }
}

LabeledDataset standardize(LabeledDataset ds, StandardizeMode mode) {
  if (mode == StandardizeMode::none) return ds;
  const std::size_t n = ds.size();
  if (n < 2) return ds;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ds.points(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = ds.points(i, j) - mean;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) continue;
    for (std::size_t i = 0; i < n; ++i) ds.points(i, j) = (ds.points(i, j) - mean) / sd;
  }
  return ds;
}

}  // namespace clusterplot
