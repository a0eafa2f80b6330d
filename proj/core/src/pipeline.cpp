#include "clusterplot/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "clusterplot/error.hpp"
#include "clusterplot/matrix_io.hpp"
#include "clusterplot/parallel.hpp"
#include "clusterplot/random.hpp"

namespace clusterplot {

namespace fs = std::filesystem;

namespace {

template <typename F>
auto stage(std::string_view name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", name, e.what()));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", name, e.what()));
  } catch (const PipelineError& e) {
    throw PipelineError(fmt::format("{}: {}", name, e.what()));
  } catch (const std::bad_alloc&) {
    throw PipelineError(fmt::format("{}: out of memory", name));
  }
}

// Tracks written files so that a failed run leaves nothing behind.
class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void open() {
    std::error_code ec;
    if (!fs::exists(dir_)) {
      if (!fs::create_directories(dir_, ec) || ec)
        throw ConfigError(fmt::format("cannot create output directory '{}'", dir_.string()));
      created_dir_ = true;
    } else if (!fs::is_directory(dir_)) {
      throw ConfigError(fmt::format("output path '{}' is not a directory", dir_.string()));
    } else {
      remove_previous_run();
    }
  }

  void write(const std::string& name, const std::string& contents) {
    remember(name);
    write_file(dir_ / name, contents);
  }

  /// For writers that take a path.
  fs::path reserve(const std::string& name) {
    remember(name);
    return dir_ / name;
  }

  Manifest finish() {
    Manifest m;
    for (const auto& name : names_) m.artifacts.push_back({name, sha256_hex(read_file(dir_ / name))});
    m.artifacts.push_back({kManifestName, "-"});
    std::sort(m.artifacts.begin(), m.artifacts.end(),
              [](const ArtifactEntry& a, const ArtifactEntry& b) { return a.name < b.name; });
    remember(kManifestName);
    write_file(dir_ / kManifestName, m.text());
    done_ = true;
    return m;
  }

  ~Output() {
    if (done_) return;
    std::error_code ec;
    for (const auto& name : names_) fs::remove(dir_ / name, ec);
    if (created_dir_) fs::remove(dir_, ec);
  }

 private:
  void remember(const std::string& name) {
    if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
  }

  // Files listed by an earlier manifest are ours to replace.
  void remove_previous_run() {
    const fs::path old = dir_ / kManifestName;
    if (!fs::exists(old)) return;
    std::ifstream in(old);
    std::string line;
    std::error_code ec;
    while (std::getline(in, line)) {
      const auto sep = line.find("  ");
      if (sep == std::string::npos) continue;
      const fs::path name = line.substr(sep + 2);
      if (name.has_parent_path() || name.empty()) continue;
      fs::remove(dir_ / name, ec);
    }
  }

  fs::path dir_;
  std::vector<std::string> names_;
  bool created_dir_ = false;
  bool done_ = false;
};

class ThreadScope {
 public:
  explicit ThreadScope(std::size_t n) : previous_(thread_count()) {
    set_thread_count(n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n);
  }
  ~ThreadScope() { set_thread_count(previous_); }

 private:
  std::size_t previous_;
};

std::vector<std::string> anchor_names(const SubClustering& sc, std::span<const std::string> class_names) {
  std::vector<std::string> names;
  for (std::size_t a = 0; a < sc.num_anchors(); ++a)
    names.push_back(fmt::format("{}#{}", class_names[sc.anchor_label[a]], a));
  return names;
}

Matrix abs_difference(const Matrix& a, const Matrix& b) {
  Matrix d(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d(i, j) = std::abs(a(i, j) - b(i, j));
  return d;
}

std::string format_embedding(std::span<const Point2> initial, std::span<const Point2> final_coords,
                             const SubClustering& sc) {
  std::string out = "id,label,x0,y0,x,y\n";
  for (std::size_t a = 0; a < sc.num_anchors(); ++a)
    out += fmt::format("{},{},{},{},{},{}\n", a, sc.anchor_label[a], initial[a].x, initial[a].y, final_coords[a].x,
                       final_coords[a].y);
  return out;
}

const char* direction_name(StepDirection d) {
  switch (d) {
    case StepDirection::push: return "push";
    case StepDirection::pull: return "pull";
    case StepDirection::none: break;
  }
  return "none";
}

std::string format_trace(const OptimizationTrace& trace) {
  std::string out = "iteration,mae,i,j,direction,step,distance_before,distance_after\n";
  for (const auto& r : trace.records)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.iteration, r.mae, r.i, r.j, direction_name(r.direction), r.step,
                       r.distance_before, r.distance_after);
  out += fmt::format("# status={} initial_mae={} best_mae={} best_iteration={}\n",
                     trace.status == OptimizeStatus::converged ? "converged" : "exhausted", trace.initial_mae,
                     trace.best_mae, trace.best_iteration);
  return out;
}

struct HighDim {
  LabeledDataset ds;
  SubClustering sc;
  Matrix anchor_overlap;
  Matrix label_overlap;
  Matrix proximity;
};

HighDim high_dimensional(const RunConfig& config, Output& out, RunSummary& summary) {
  HighDim h;
  h.ds = stage("dataset", [&] { return load_dataset(config.ingest); });
  h.sc = stage("subclustering", [&] { return subcluster_dataset(h.ds, config.birch); });
  if (h.sc.auto_search_failed)
    summary.warnings.push_back(fmt::format("threshold search missed the anchor band {}:{}; closest threshold used",
                                           config.birch.auto_target.lo, config.birch.auto_target.hi));
  summary.num_anchors = h.sc.num_anchors();
  stage("relations", [&] {
    const auto graph = build_knn(h.ds.points, config.relations.k_overlap);
    if (graph.truncated())
      summary.warnings.push_back(fmt::format("fewer than {} neighbours for some points", config.relations.k_overlap));
    h.anchor_overlap = anchor_overlap(graph, h.sc.assignment, h.sc.num_anchors());
    h.label_overlap = label_overlap(graph, h.ds.labels, h.ds.num_classes());
    h.proximity = proximity(h.sc.anchors, h.sc.anchor_label, h.ds.num_classes(), config.relations.k_proximity);
  });

  const auto& names = h.ds.class_names;
  stage("artifacts", [&] {
    write_anchor_dump(h.sc, names, out.reserve("anchors.csv"));
    out.write("overlap_high.csv", format_matrix(h.label_overlap, names));
    out.write("proximity_high.csv", format_matrix(h.proximity, names));
    out.write("anchor_overlap_high.csv", format_matrix(h.anchor_overlap, anchor_names(h.sc, names)));
    out.write("heatmap_overlap_high.svg",
              render_heatmap(h.label_overlap, names, config.render, "overlap (original space)"));
    out.write("heatmap_proximity_high.svg",
              render_heatmap(h.proximity, names, config.render, "proximity (original space)"));
    if (config.confusion) {
      const Matrix confusion = knn_confusion(h.ds, config.relations.k_confusion);
      out.write("confusion.csv", format_matrix(confusion, names));
      out.write("heatmap_confusion.svg", render_heatmap(confusion, names, config.render, "KNN confusion"));
    }
  });
  return h;
}

void prepare(const RunConfig& config, Output& out) {
  stage("config", [&] { config.validate(); });
  if (!fs::exists(config.ingest.path))
    throw DataError(fmt::format("dataset: input file '{}' does not exist", config.ingest.path.string()));
  stage("output", [&] { out.open(); });
  out.write("config.txt", echo_config(config));
}

}  // namespace

std::string Manifest::text() const {
  std::string out;
  for (const auto& a : artifacts) out += fmt::format("{}  {}\n", a.sha256, a.name);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw PipelineError("SHA-256 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

RunSummary run(const RunConfig& config) {
  ThreadScope threads(config.threads);
  Output out(config.output_dir);
  RunSummary summary;
  prepare(config, out);
  HighDim h = high_dimensional(config, out, summary);
  const auto& names = h.ds.class_names;

  AnchorEmbedding embedding = stage("embedding", [&] {
    bool rank_deficient = false;
    auto e = embed_anchors(h.sc.anchors, config.embed, &rank_deficient);
    if (rank_deficient) summary.warnings.push_back("embedding is rank deficient; second axis is flat");
    return e;
  });

  GeometryParams geometry = config.geometry;
  geometry.seed = module_seed(config.seed, "geometry");
  OptimizeParams params = config.optimize;
  params.seed = config.seed;

  OptimizeResult opt = stage("optimizer", [&] {
    return optimize(embedding.coords, h.anchor_overlap, h.sc, params, geometry, config.relations.k_overlap);
  });
  summary.initial_mae = opt.trace.initial_mae;
  summary.best_mae = opt.trace.best_mae;
  summary.status = opt.trace.status;
  summary.iterations_run = opt.trace.records.size();

  stage("render", [&] {
    const auto& fin = opt.final_state;
    const Matrix low_proximity =
        proximity(std::span<const Point2>(opt.coords), h.sc.anchor_label, names.size(), config.relations.k_proximity);
    const auto anchors = anchor_names(h.sc, names);
    out.write("overlap_low.csv", format_matrix(fin.label_overlap, names));
    out.write("proximity_low.csv", format_matrix(low_proximity, names));
    out.write("anchor_overlap_low.csv", format_matrix(fin.anchor_overlap, anchors));
    out.write("anchor_overlap_initial.csv", format_matrix(opt.initial.anchor_overlap, anchors));
    out.write("heatmap_overlap_low.svg", render_heatmap(fin.label_overlap, names, config.render, "overlap (plot)"));
    out.write("heatmap_proximity_low.svg", render_heatmap(low_proximity, names, config.render, "proximity (plot)"));
    out.write("heatmap_difference_before.svg",
              render_heatmap(abs_difference(h.anchor_overlap, opt.initial.anchor_overlap), anchors, config.render,
                             "|anchor overlap difference| before optimisation"));
    out.write("heatmap_difference_after.svg",
              render_heatmap(abs_difference(h.anchor_overlap, fin.anchor_overlap), anchors, config.render,
                             "|anchor overlap difference| after optimisation"));
    out.write("embedding.csv", format_embedding(embedding.coords, opt.coords, h.sc));
    out.write("trace.csv", format_trace(opt.trace));
    out.write("geometry.csv", format_geometry(fin.blobs, names));
    out.write("clusterplot.svg", render_clusterplot(fin.blobs, names, config.render, &summary.warnings));
  });
  summary.manifest = stage("manifest", [&] { return out.finish(); });
  return summary;
}

RunSummary measure(const RunConfig& config) {
  ThreadScope threads(config.threads);
  Output out(config.output_dir);
  RunSummary summary;
  prepare(config, out);
  high_dimensional(config, out, summary);
  summary.manifest = stage("manifest", [&] { return out.finish(); });
  return summary;
}

std::string render_saved(const fs::path& geometry, const RenderConfig& config, std::vector<std::string>* warnings) {
  const GeometryDump dump = stage("geometry", [&] { return read_geometry(geometry); });
  return stage("render", [&] { return render_clusterplot(dump.blobs, dump.class_names, config, warnings); });
}

}  // namespace clusterplot
