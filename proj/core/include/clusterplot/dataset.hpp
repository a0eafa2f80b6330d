#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "clusterplot/matrix.hpp"

namespace clusterplot {

/// N x D feature matrix with a dense class index per row.
///
/// Invariants (checked by validate()): labels.size() == N, every label is
/// below M, every class owns at least one row, all features are finite,
/// N >= M >= 2 and D >= 2.
struct LabeledDataset {
  Matrix points;
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return points.rows(); }
  std::size_t dim() const noexcept { return points.cols(); }
  std::size_t num_classes() const noexcept { return class_names.size(); }

  std::vector<std::size_t> class_counts() const;

  /// Throws DataError describing the first violated invariant.
  void validate() const;
};

enum class InputFormat { text, binary };
enum class StandardizeMode { none, zscore };

struct IngestSpec {
  std::filesystem::path path;
  InputFormat format = InputFormat::text;
  /// Header name or 0-based column index; empty selects the last column.
  std::string label_column;
  /// Binary only: key=value sidecar with n, d, dtype and optional labels.
  std::filesystem::path sidecar_path;
  StandardizeMode standardize = StandardizeMode::none;
};

/// Comma-separated text with an optional header row. The header is detected
/// when a label column is named, or when any feature cell of the first row
/// is not numeric. Labels are re-encoded to 0..M-1 in first-appearance order.
LabeledDataset load_text(const IngestSpec& spec);

/// Little-endian row-major f32/f64 payload described by a sidecar of
/// `n=`, `d=`, `dtype=` lines. Labels come from the sidecar's optional
/// `labels=` path (relative to the sidecar), else `<payload>.labels`.
LabeledDataset load_binary(const IngestSpec& spec);

/// Dispatches on spec.format, then applies spec.standardize.
LabeledDataset load_dataset(const IngestSpec& spec);

/// Writes a header `f0,..,f{D-1},label` and one row per point at full
/// precision so that load_text reproduces the dataset exactly.
void write_text(const LabeledDataset& ds, const std::filesystem::path& path);

/// zscore: per column mean 0 and sample standard deviation 1. Columns with
/// zero variance (or a single row) pass through untouched.
LabeledDataset standardize(LabeledDataset ds, StandardizeMode mode);

/// Maps raw string labels to dense first-appearance indices.
void encode_labels(const std::vector<std::string>& raw, std::vector<std::size_t>& labels,
                   std::vector<std::string>& class_names);

}  // namespace clusterplot
