#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clusterplot/dataset.hpp"
#include "clusterplot/embedding.hpp"
#include "clusterplot/geometry.hpp"
#include "clusterplot/optimizer.hpp"
#include "clusterplot/relations.hpp"
#include "clusterplot/render.hpp"
#include "clusterplot/subclustering.hpp"

namespace clusterplot {

struct RunConfig {
  IngestSpec ingest;
  BirchParams birch;
  EmbedSpec embed;
  RelationParams relations;
  GeometryParams geometry;
  OptimizeParams optimize;
  RenderConfig render;
  /// Also write the KNN confusion matrix of the data.
  bool confusion = false;
  std::uint64_t seed = 0;
  /// 0 = hardware concurrency.
  std::size_t threads = 0;
  std::filesystem::path output_dir = "clusterplot-out";

  /// Component invariants plus a non-empty input path.
  void validate() const;
};

/// Every recognised key, in echo order. Flags are the same names with `--`.
const std::vector<std::string>& config_keys();
/// Keys whose flag form takes no value (`--key` means true).
bool is_switch_key(const std::string& key);

/// Sets one key from its text form; throws ConfigError naming the key.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Text form of one key, parseable by apply_setting.
std::string get_setting(const RunConfig& config, const std::string& key);

/// Flat `key = value` lines (`#` comments) or a JSON object of the same keys.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Defaults, then the file (if any), then flags.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::vector<std::pair<std::string, std::string>>& flags);

/// key=value echo of every setting except `threads` and `out`, which do not
/// affect results.
std::string echo_config(const RunConfig& config);

}  // namespace clusterplot
