#include "clusterplot/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "clusterplot/error.hpp"
#include "clusterplot/matrix_io.hpp"

namespace clusterplot {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, value));
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v))
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, value));
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "off" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

std::string real(double v) { return fmt::format("{}", v); }
std::string boolean(bool v) { return v ? "true" : "false"; }

template <typename E>
E parse_choice(const std::string& key, const std::string& value,
               std::initializer_list<std::pair<const char*, E>> choices) {
  for (const auto& [name, e] : choices)
    if (value == name) return e;
  std::string names;
  for (const auto& [name, e] : choices) names += std::string(names.empty() ? "" : "|") + name;
  throw ConfigError(fmt::format("{}: '{}' is not one of {}", key, value, names));
}

struct Setting {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool is_switch = false;
};

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = [] {
    std::vector<Setting> t;
    const auto add = [&](std::string key, auto set, auto get, bool sw = false) {
      t.push_back({std::move(key), set, get, sw});
    };
    using C = RunConfig;
    using S = const std::string&;

    add("input", [](C& c, S v) { c.ingest.path = v; }, [](const C& c) { return c.ingest.path.string(); });
    add("format",
        [](C& c, S v) {
          c.ingest.format = parse_choice<InputFormat>("format", v, {{"text", InputFormat::text}, {"binary", InputFormat::binary}});
        },
        [](const C& c) { return std::string(c.ingest.format == InputFormat::text ? "text" : "binary"); });
    add("label-col", [](C& c, S v) { c.ingest.label_column = v; }, [](const C& c) { return c.ingest.label_column; });
    add("sidecar", [](C& c, S v) { c.ingest.sidecar_path = v; }, [](const C& c) { return c.ingest.sidecar_path.string(); });
    add("standardize",
        [](C& c, S v) {
          c.ingest.standardize = parse_choice<StandardizeMode>("standardize", v,
                                                               {{"none", StandardizeMode::none}, {"zscore", StandardizeMode::zscore}});
        },
        [](const C& c) { return std::string(c.ingest.standardize == StandardizeMode::none ? "none" : "zscore"); });
    add("birch-threshold",
        [](C& c, S v) {
          if (v == "auto") c.birch.threshold.reset();
          else c.birch.threshold = parse_real("birch-threshold", v);
        },
        [](const C& c) { return c.birch.threshold ? real(*c.birch.threshold) : std::string("auto"); });
    add("birch-branching", [](C& c, S v) { c.birch.branching = parse_integer<std::size_t>("birch-branching", v); },
        [](const C& c) { return std::to_string(c.birch.branching); });
    add("anchors-target",
        [](C& c, S v) {
          const auto colon = v.find(':');
          if (colon == std::string::npos) throw ConfigError(fmt::format("anchors-target: '{}' is not lo:hi", v));
          c.birch.auto_target.lo = parse_integer<std::size_t>("anchors-target", v.substr(0, colon));
          c.birch.auto_target.hi = parse_integer<std::size_t>("anchors-target", v.substr(colon + 1));
        },
        [](const C& c) { return fmt::format("{}:{}", c.birch.auto_target.lo, c.birch.auto_target.hi); });
    add("anchors-per-class", [](C& c, S v) { c.birch.per_class = parse_bool("anchors-per-class", v); },
        [](const C& c) { return boolean(c.birch.per_class); }, true);
    add("embed",
        [](C& c, S v) {
          c.embed.backend = parse_choice<EmbedBackend>(
              "embed", v, {{"pca", EmbedBackend::pca}, {"mds", EmbedBackend::mds}, {"external", EmbedBackend::external}});
        },
        [](const C& c) {
          switch (c.embed.backend) {
            case EmbedBackend::mds: return std::string("mds");
            case EmbedBackend::external: return std::string("external");
            default: return std::string("pca");
          }
        });
    add("external-coords", [](C& c, S v) { c.embed.external_path = v; },
        [](const C& c) { return c.embed.external_path.string(); });
    add("k-overlap", [](C& c, S v) { c.relations.k_overlap = parse_integer<std::size_t>("k-overlap", v); },
        [](const C& c) { return std::to_string(c.relations.k_overlap); });
    add("k-prox", [](C& c, S v) { c.relations.k_proximity = parse_integer<std::size_t>("k-prox", v); },
        [](const C& c) { return std::to_string(c.relations.k_proximity); });
    add("k-confusion", [](C& c, S v) { c.relations.k_confusion = parse_integer<std::size_t>("k-confusion", v); },
        [](const C& c) { return std::to_string(c.relations.k_confusion); });
    add("confusion", [](C& c, S v) { c.confusion = parse_bool("confusion", v); },
        [](const C& c) { return boolean(c.confusion); }, true);
    add("alpha-radius",
        [](C& c, S v) {
          if (v == "auto") c.geometry.alpha_radius.reset();
          else c.geometry.alpha_radius = parse_real("alpha-radius", v);
        },
        [](const C& c) { return c.geometry.alpha_radius ? real(*c.geometry.alpha_radius) : std::string("auto"); });
    add("lof-k",
        [](C& c, S v) {
          if (v == "auto") c.geometry.lof_k.reset();
          else c.geometry.lof_k = parse_integer<std::size_t>("lof-k", v);
        },
        [](const C& c) { return c.geometry.lof_k ? std::to_string(*c.geometry.lof_k) : std::string("auto"); });
    add("lof-threshold", [](C& c, S v) { c.geometry.lof_threshold = parse_real("lof-threshold", v); },
        [](const C& c) { return real(c.geometry.lof_threshold); });
    add("smoothing-passes",
        [](C& c, S v) { c.geometry.smoothing_passes = parse_integer<std::size_t>("smoothing-passes", v); },
        [](const C& c) { return std::to_string(c.geometry.smoothing_passes); });
    add("virtual-cap", [](C& c, S v) { c.geometry.virtual_cap = parse_integer<std::size_t>("virtual-cap", v); },
        [](const C& c) { return std::to_string(c.geometry.virtual_cap); });
    add("iterations", [](C& c, S v) { c.optimize.iterations = parse_integer<std::size_t>("iterations", v); },
        [](const C& c) { return std::to_string(c.optimize.iterations); });
    add("lr", [](C& c, S v) { c.optimize.learning_rate = parse_real("lr", v); },
        [](const C& c) { return real(c.optimize.learning_rate); });
    add("delta", [](C& c, S v) { c.optimize.delta = parse_real("delta", v); },
        [](const C& c) { return real(c.optimize.delta); });
    add("stall-patience",
        [](C& c, S v) { c.optimize.stall_patience = parse_integer<std::size_t>("stall-patience", v); },
        [](const C& c) { return std::to_string(c.optimize.stall_patience); });
    add("damp-factor", [](C& c, S v) { c.optimize.damp_factor = parse_real("damp-factor", v); },
        [](const C& c) { return real(c.optimize.damp_factor); });
    add("inter-label-only", [](C& c, S v) { c.optimize.inter_label_only = parse_bool("inter-label-only", v); },
        [](const C& c) { return boolean(c.optimize.inter_label_only); }, true);
    add("lazy-remeasure", [](C& c, S v) { c.optimize.lazy = parse_bool("lazy-remeasure", v); },
        [](const C& c) { return boolean(c.optimize.lazy); }, true);
    add("canvas", [](C& c, S v) { c.render.canvas_px = parse_integer<std::size_t>("canvas", v); },
        [](const C& c) { return std::to_string(c.render.canvas_px); });
    add("palette",
        [](C& c, S v) {
          std::vector<std::string> colours;
          for (const auto& part : split_commas(v)) colours.push_back(trim(part));
          c.render.palette = std::move(colours);
        },
        [](const C& c) {
          std::string out;
          for (const auto& p : c.render.palette) out += (out.empty() ? "" : ",") + p;
          return out;
        });
    add("fill-opacity", [](C& c, S v) { c.render.fill_opacity = parse_real("fill-opacity", v); },
        [](const C& c) { return real(c.render.fill_opacity); });
    add("stroke-frac", [](C& c, S v) { c.render.stroke_width_frac = parse_real("stroke-frac", v); },
        [](const C& c) { return real(c.render.stroke_width_frac); });
    add("legend", [](C& c, S v) { c.render.legend = parse_bool("legend", v); },
        [](const C& c) { return std::string(c.render.legend ? "on" : "off"); });
    add("colormap", [](C& c, S v) { c.render.heatmap_colormap = v; },
        [](const C& c) { return c.render.heatmap_colormap; });
    add("seed", [](C& c, S v) { c.seed = parse_integer<std::uint64_t>("seed", v); },
        [](const C& c) { return std::to_string(c.seed); });
    add("threads", [](C& c, S v) { c.threads = parse_integer<std::size_t>("threads", v); },
        [](const C& c) { return std::to_string(c.threads); });
    add("out", [](C& c, S v) { c.output_dir = v; }, [](const C& c) { return c.output_dir.string(); });
    return t;
  }();
  return table;
}

const Setting& find_setting(const std::string& key) {
  for (const auto& s : settings())
    if (s.key == key) return s;
  throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

std::string json_scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return fmt::format("{}", v.get<double>());
  if (v.is_array() && key == "palette") {
    std::string out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError("palette: entries must be strings");
      out += (out.empty() ? "" : ",") + e.get<std::string>();
    }
    return out;
  }
  throw ConfigError(fmt::format("{}: unsupported value {}", key, v.dump()));
}

}  // namespace

void RunConfig::validate() const {
  if (ingest.path.empty()) throw ConfigError("input: no input file given");
  if (ingest.format == InputFormat::binary && ingest.sidecar_path.empty())
    throw ConfigError("sidecar: binary input needs a sidecar file");
  birch.validate();
  embed.validate();
  relations.validate();
  geometry.validate();
  optimize.validate();
  render.validate();
  if (output_dir.empty()) throw ConfigError("out: output directory must not be empty");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& s : settings()) k.push_back(s.key);
    return k;
  }();
  return keys;
}

bool is_switch_key(const std::string& key) { return find_setting(key).is_switch; }

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  find_setting(key).set(config, value);
}

std::string get_setting(const RunConfig& config, const std::string& key) { return find_setting(key).get(config); }

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw ConfigError("JSON config must be an object");
    for (const auto& [key, value] : doc.items()) {
      find_setting(key);
      out.emplace_back(key, json_scalar(key, value));
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", number));
    std::string key = trim(std::string_view(t).substr(0, eq));
    find_setting(key);
    out.emplace_back(std::move(key), trim(std::string_view(t).substr(eq + 1)));
  }
  return out;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file,
                         const std::vector<std::pair<std::string, std::string>>& flags) {
  RunConfig config;
  if (file) {
    std::string text;
    try {
      text = read_file(*file);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    for (const auto& [k, v] : parse_config_text(text)) apply_setting(config, k, v);
  }
  for (const auto& [k, v] : flags) apply_setting(config, k, v);
  return config;
}

std::string echo_config(const RunConfig& config) {
  std::string out;
  for (const auto& s : settings()) {
    if (s.key == "threads" || s.key == "out") continue;
    out += fmt::format("{} = {}\n", s.key, s.get(config));
  }
  return out;
}

}  // namespace clusterplot
