#include <cstdio>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "clusterplot/config.hpp"
#include "clusterplot/dataset.hpp"
#include "clusterplot/error.hpp"
#include "clusterplot/matrix_io.hpp"
#include "clusterplot/pipeline.hpp"
#include "clusterplot/toy.hpp"

namespace cp = clusterplot;

namespace {

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help{
      {"input", "data file (CSV with labels, or binary payload)"},
      {"format", "text | binary"},
      {"label-col", "label column name or 0-based index (default: last)"},
      {"sidecar", "binary input: key=value description file"},
      {"standardize", "none | zscore"},
      {"birch-threshold", "sub-cluster radius bound, or auto"},
      {"birch-branching", "CF-tree node capacity"},
      {"anchors-target", "auto threshold band for anchors per class, lo:hi"},
      {"anchors-per-class", "search the auto threshold separately per class"},
      {"embed", "pca | mds | external"},
      {"external-coords", "id,x,y file for --embed external"},
      {"k-overlap", "neighbours per point for overlap matrices"},
      {"k-prox", "neighbours per anchor for proximity matrices"},
      {"k-confusion", "neighbours for the KNN classifier confusion"},
      {"confusion", "also write the KNN confusion matrix"},
      {"alpha-radius", "alpha-shape circumradius bound, or auto"},
      {"lof-k", "LOF neighbourhood size, or auto"},
      {"lof-threshold", "anchors with LOF above this are outliers"},
      {"smoothing-passes", "Chaikin passes on blob outlines"},
      {"virtual-cap", "maximum number of virtual points"},
      {"iterations", "optimizer iteration limit"},
      {"lr", "optimizer learning rate"},
      {"delta", "stop once the overlap MAE is at most this"},
      {"stall-patience", "iterations without improvement before damping"},
      {"damp-factor", "learning-rate multiplier on stalls"},
      {"inter-label-only", "optimize only anchor pairs of different labels"},
      {"lazy-remeasure", "re-measure only the moved anchor's label"},
      {"canvas", "SVG side length in pixels"},
      {"palette", "comma-separated #rrggbb colours"},
      {"fill-opacity", "blob fill opacity in [0, 1]"},
      {"stroke-frac", "outline width as a fraction of the canvas"},
      {"legend", "on | off"},
      {"colormap", "heatmap colours: viridis | greys"},
      {"seed", "random seed"},
      {"threads", "worker threads (0 = all cores)"},
      {"out", "output directory"},
  };
  return help;
}

std::string help_for(const std::string& key) {
  const auto it = key_help().find(key);
  return it == key_help().end() ? std::string() : it->second;
}

struct KeyOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::string config_file;

  void attach(CLI::App& app, const std::vector<std::string>& keys) {
    for (const auto& key : keys) {
      if (cp::is_switch_key(key)) {
        app.add_flag("--" + key, switches[key], help_for(key));
      } else {
        app.add_option("--" + key, values[key], help_for(key));
      }
    }
  }

  std::vector<std::pair<std::string, std::string>> flags(const CLI::App& app) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, value] : values)
      if (app.count("--" + key)) out.emplace_back(key, value);
    for (const auto& [key, on] : switches)
      if (app.count("--" + key)) out.emplace_back(key, on ? "true" : "false");
    return out;
  }

  cp::RunConfig resolve(const CLI::App& app) const {
    std::optional<std::filesystem::path> file;
    if (!config_file.empty()) file = config_file;
    return cp::resolve_config(file, flags(app));
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clusterplot: blob diagrams of labeled high-dimensional data"};
  app.require_subcommand(1);

  KeyOptions run_opts;
  auto* run = app.add_subcommand("run", "full pipeline: relations, embedding, optimisation, plot");
  run->add_option("--config", run_opts.config_file, "key=value or JSON configuration file");
  run_opts.attach(*run, cp::config_keys());

  KeyOptions measure_opts;
  auto* measure = app.add_subcommand("measure", "original-space overlap and proximity matrices only");
  measure->add_option("--config", measure_opts.config_file, "key=value or JSON configuration file");
  measure_opts.attach(*measure, cp::config_keys());

  std::string toy_name, toy_out;
  cp::ToyParams toy;
  std::uint64_t toy_seed = 0;
  auto* gen = app.add_subcommand("gen-toy", "write a synthetic dataset as CSV");
  gen->add_option("name", toy_name, "hourglass | cross | gaussians")->required();
  gen->add_option("--n", toy.n, "number of points");
  gen->add_option("--classes", toy.classes, "gaussians: number of classes");
  gen->add_option("--dim", toy.dim, "gaussians: dimension");
  gen->add_option("--separation", toy.separation, "gaussians: centre distance in sigmas");
  gen->add_option("--sigma", toy.sigma, "gaussians: standard deviation");
  gen->add_option("--seed", toy_seed);
  gen->add_option("--out", toy_out, "output CSV")->required();

  KeyOptions render_opts;
  std::string geometry_path, svg_out;
  auto* render = app.add_subcommand("render", "redraw a plot from a saved geometry.csv");
  render->add_option("--geometry", geometry_path, "geometry dump written by run")->required();
  render->add_option("--config", render_opts.config_file, "configuration file for render settings");
  render_opts.attach(*render, {"canvas", "palette", "fill-opacity", "stroke-frac", "legend", "colormap"});
  render->add_option("--out", svg_out, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run->parsed() || measure->parsed()) {
      const bool full = run->parsed();
      const cp::RunConfig config = full ? run_opts.resolve(*run) : measure_opts.resolve(*measure);
      const cp::RunSummary summary = full ? cp::run(config) : cp::measure(config);
      print_warnings(summary.warnings);
      fmt::print("anchors: {}\n", summary.num_anchors);
      if (full)
        fmt::print("anchor overlap MAE: {:.4f} -> {:.4f} ({}, {} iterations)\n", summary.initial_mae, summary.best_mae,
                   summary.status == cp::OptimizeStatus::converged ? "converged" : "iteration limit",
                   summary.iterations_run);
      fmt::print("{} artifacts in {}\n", summary.manifest.artifacts.size(), config.output_dir.string());
    } else if (gen->parsed()) {
      const cp::LabeledDataset ds = cp::generate_toy(toy_name, toy, toy_seed);
      cp::write_text(ds, toy_out);
      fmt::print("{} points, {} classes -> {}\n", ds.size(), ds.num_classes(), toy_out);
    } else if (render->parsed()) {
      const cp::RunConfig config = render_opts.resolve(*render);
      std::vector<std::string> warnings;
      const std::string svg = cp::render_saved(geometry_path, config.render, &warnings);
      print_warnings(warnings);
      cp::write_file(svg_out, svg);
    }
  } catch (const cp::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
