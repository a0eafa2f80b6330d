#include "clusterplot/subclustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/parallel.hpp"

namespace clusterplot {

void CFEntry::add_point(std::span<const double> x) {
  ++n;
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    linear_sum[k] += x[k];
    sq += x[k] * x[k];
  }
  squared_sum += sq;
}

void CFEntry::merge(const CFEntry& other) {
  n += other.n;
  for (std::size_t k = 0; k < linear_sum.size(); ++k) linear_sum[k] += other.linear_sum[k];
  squared_sum += other.squared_sum;
}

std::vector<double> CFEntry::centroid() const {
  std::vector<double> c(linear_sum);
  for (auto& v : c) v /= static_cast<double>(n);
  return c;
}

double CFEntry::radius() const {
  if (n == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(n);
  double c2 = 0.0;
  for (const double v : linear_sum) c2 += (v * inv) * (v * inv);
  return std::sqrt(std::max(0.0, squared_sum * inv - c2));
}

double CFEntry::radius_with(std::span<const double> x) const {
  const double inv = 1.0 / static_cast<double>(n + 1);
  double c2 = 0.0;
  double sq = squared_sum;
  for (std::size_t k = 0; k < linear_sum.size(); ++k) {
    const double m = (linear_sum[k] + x[k]) * inv;
    c2 += m * m;
    sq += x[k] * x[k];
  }
  return std::sqrt(std::max(0.0, sq * inv - c2));
}

namespace {

double centroid_distance2(const CFEntry& e, std::span<const double> x) {
  const double inv = 1.0 / static_cast<double>(e.n);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = e.linear_sum[k] * inv - x[k];
    s += d * d;
  }
  return s;
}

double centroid_distance2(const CFEntry& a, const CFEntry& b) {
  const double ia = 1.0 / static_cast<double>(a.n);
  const double ib = 1.0 / static_cast<double>(b.n);
  double s = 0.0;
  for (std::size_t k = 0; k < a.linear_sum.size(); ++k) {
    const double d = a.linear_sum[k] * ia - b.linear_sum[k] * ib;
    s += d * d;
  }
  return s;
}

struct Node {
  bool leaf = true;
  std::vector<CFEntry> entries;
  std::vector<std::unique_ptr<Node>> children;  // non-leaf
  std::vector<std::size_t> leaf_ids;            // leaf
};

class CFTree {
 public:
  CFTree(std::size_t dim, double threshold, std::size_t branching)
      : dim_(dim), threshold_(threshold), branching_(branching), root_(std::make_unique<Node>()) {}

  void insert(std::span<const double> x, std::size_t row) {
    auto split = insert_into(*root_, x, row);
    if (!split) return;
    auto new_root = std::make_unique<Node>();
    new_root->leaf = false;
    for (auto* half : {&root_, &split}) {
      new_root->entries.push_back(summarize(**half));
      new_root->children.push_back(std::move(*half));
    }
    root_ = std::move(new_root);
  }

  BirchResult finish(std::size_t rows) && {
    BirchResult out;
    out.leaves = std::move(leaves_);
    out.assignment.assign(rows, 0);
    for (std::size_t l = 0; l < out.leaves.size(); ++l)
      for (const auto r : out.leaves[l].members) out.assignment[r] = l;
    return out;
  }

 private:
  CFEntry summarize(const Node& node) const {
    CFEntry total(dim_);
    for (const auto& e : node.entries) total.merge(e);
    return total;
  }

  static std::size_t nearest_entry(const Node& node, std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.entries.size(); ++i) {
      const double d = centroid_distance2(node.entries[i], x);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  // Returns the new sibling when `node` had to split.
  std::unique_ptr<Node> insert_into(Node& node, std::span<const double> x, std::size_t row) {
    if (node.leaf) {
      if (!node.entries.empty()) {
        const std::size_t i = nearest_entry(node, x);
        if (node.entries[i].radius_with(x) <= threshold_) {
          node.entries[i].add_point(x);
          auto& leaf = leaves_[node.leaf_ids[i]];
          leaf.cf.add_point(x);
          leaf.members.push_back(row);
          return nullptr;
        }
      }
      CFEntry e(dim_);
      e.add_point(x);
      node.entries.push_back(e);
      node.leaf_ids.push_back(leaves_.size());
      leaves_.push_back(BirchLeaf{e, {row}});
    } else {
      const std::size_t i = nearest_entry(node, x);
      auto sibling = insert_into(*node.children[i], x, row);
      if (sibling) {
        node.entries[i] = summarize(*node.children[i]);
        node.entries.insert(node.entries.begin() + static_cast<std::ptrdiff_t>(i) + 1, summarize(*sibling));
        node.children.insert(node.children.begin() + static_cast<std::ptrdiff_t>(i) + 1, std::move(sibling));
      } else {
        node.entries[i].add_point(x);
      }
    }
    if (node.entries.size() > branching_) return split(node);
    return nullptr;
  }

  std::unique_ptr<Node> split(Node& node) const {
    const std::size_t m = node.entries.size();
    std::size_t s0 = 0, s1 = 1;
    double far = -1.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const double d = centroid_distance2(node.entries[a], node.entries[b]);
        if (d > far) {
          far = d;
          s0 = a;
          s1 = b;
        }
      }

    const CFEntry seed0 = node.entries[s0];
    const CFEntry seed1 = node.entries[s1];
    Node keep;
    keep.leaf = node.leaf;
    auto other = std::make_unique<Node>();
    other->leaf = node.leaf;
    for (std::size_t i = 0; i < m; ++i) {
      bool to_other;
      if (i == s0) to_other = false;
      else if (i == s1) to_other = true;
      else
        to_other = centroid_distance2(node.entries[i], seed1) < centroid_distance2(node.entries[i], seed0);
      Node& dst = to_other ? *other : keep;
      dst.entries.push_back(std::move(node.entries[i]));
      if (node.leaf) dst.leaf_ids.push_back(node.leaf_ids[i]);
      else dst.children.push_back(std::move(node.children[i]));
    }
    node = std::move(keep);
    return other;
  }

  std::size_t dim_;
  double threshold_;
  std::size_t branching_;
  std::unique_ptr<Node> root_;
  std::vector<BirchLeaf> leaves_;
};

}  // namespace

BirchResult birch_fit(const Matrix& points, double threshold, std::size_t branching) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n == 0) throw DataError("birch_fit: no points");
  if (!(threshold > 0.0)) throw ConfigError("birch_fit: threshold must be positive");
  if (branching < 2) throw ConfigError("birch_fit: branching must be at least 2");

  // CF sums are accumulated relative to the column means so that the
  // SS/n - |LS/n|^2 radius does not cancel catastrophically far from the origin.
  std::vector<double> shift(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) shift[k] += points(i, k);
  for (auto& s : shift) s /= static_cast<double>(n);

  CFTree tree(d, threshold, branching);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) x[k] = points(i, k) - shift[k];
    tree.insert(x, i);
  }
  auto result = std::move(tree).finish(n);
  result.origin = std::move(shift);
  return result;
}

std::vector<double> BirchResult::centroid(std::size_t leaf) const {
  auto c = leaves[leaf].cf.centroid();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += origin[k];
  return c;
}

void BirchParams::validate() const {
  if (threshold && !(*threshold > 0.0)) throw ConfigError("birch threshold must be positive");
  if (branching < 2) throw ConfigError("birch branching must be at least 2");
  if (auto_target.lo > auto_target.hi) throw ConfigError("anchors target: lo must not exceed hi");
  if (auto_target.lo < 3) throw ConfigError("anchors target: lo must be at least 3");
}

namespace {

Matrix class_rows(const LabeledDataset& ds, std::size_t label, std::vector<std::size_t>& rows) {
  rows.clear();
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.labels[i] == label) rows.push_back(i);
  Matrix m(rows.size(), ds.dim());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = ds.points.row(rows[r]);
    std::copy(src.begin(), src.end(), m.row(r).begin());
  }
  return m;
}

// Bounding-box diagonal: upper bound on the useful threshold.
double diameter(const Matrix& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.cols(); ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      lo = std::min(lo, m(i, k));
      hi = std::max(hi, m(i, k));
    }
    s += (hi - lo) * (hi - lo);
  }
  return std::sqrt(s);
}

// Smallest positive nearest-neighbour distance over an evenly strided sample
// of at most 512 rows.
double min_spacing(const Matrix& m) {
  const std::size_t n = m.rows();
  const std::size_t stride = std::max<std::size_t>(1, n / 512);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; a += stride)
    for (std::size_t b = a + stride; b < n; b += stride) {
      const double d = squared_distance(m.row(a), m.row(b));
      if (d > 0.0) best = std::min(best, d);
    }
  return std::sqrt(best);
}

double median(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? static_cast<double>(v[n / 2]) : 0.5 * static_cast<double>(v[n / 2 - 1] + v[n / 2]);
}

struct SearchResult {
  double threshold;
  bool found;
};

// Geometric bisection on the threshold: leaf counts fall as the threshold grows.
template <class CountFn>
SearchResult search_threshold(double lo, double hi, const AnchorBand& band, CountFn&& count) {
  constexpr int kMaxSteps = 20;
  double best_t = hi;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int step = 0; step < kMaxSteps; ++step) {
    const double mid = std::sqrt(lo * hi);
    const double c = count(mid);
    const double gap = c < static_cast<double>(band.lo) ? band.lo - c
                       : c > static_cast<double>(band.hi) ? c - band.hi
                                                          : 0.0;
    if (gap < best_gap) {
      best_gap = gap;
      best_t = mid;
    }
    if (gap == 0.0) return {mid, true};
    if (c > static_cast<double>(band.hi)) lo = mid;
    else hi = mid;
  }
  return {best_t, false};
}

}  // namespace

SubClustering subcluster_dataset(const LabeledDataset& ds, const BirchParams& params) {
  params.validate();
  const std::size_t m = ds.num_classes();
  std::vector<Matrix> per_class(m);
  std::vector<std::vector<std::size_t>> rows(m);
  for (std::size_t c = 0; c < m; ++c) per_class[c] = class_rows(ds, c, rows[c]);

  std::vector<double> thresholds(m, params.threshold.value_or(0.0));
  bool failed = false;

  if (!params.threshold) {
    auto bounds = [&](std::size_t c) {
      const double hi = std::max(diameter(per_class[c]), 1e-12);
      double lo = min_spacing(per_class[c]);
      if (!std::isfinite(lo) || lo >= hi) lo = hi * 1e-6;
      return std::pair{lo, hi};
    };
    if (params.per_class) {
      std::vector<char> ok(m, 1);
      parallel_for(m, [&](std::size_t c) {
        const auto [lo, hi] = bounds(c);
        const auto r = search_threshold(lo, hi, params.auto_target, [&](double t) {
          return static_cast<double>(birch_fit(per_class[c], t, params.branching).leaves.size());
        });
        thresholds[c] = r.threshold;
        ok[c] = r.found;
      });
      failed = std::find(ok.begin(), ok.end(), 0) != ok.end();
    } else {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (std::size_t c = 0; c < m; ++c) {
        const auto [l, h] = bounds(c);
        lo = std::min(lo, l);
        hi = std::max(hi, h);
      }
      const auto r = search_threshold(lo, hi, params.auto_target, [&](double t) {
        std::vector<std::size_t> counts(m);
        parallel_for(m, [&](std::size_t c) {
          counts[c] = birch_fit(per_class[c], t, params.branching).leaves.size();
        });
        return median(counts);
      });
      thresholds.assign(m, r.threshold);
      failed = !r.found;
    }
  }

  std::vector<BirchResult> fits(m);
  parallel_for(m, [&](std::size_t c) { fits[c] = birch_fit(per_class[c], thresholds[c], params.branching); });

  SubClustering sc;
  sc.thresholds = thresholds;
  sc.auto_search_failed = failed;
  sc.assignment.assign(ds.size(), 0);
  sc.class_begin.push_back(0);
  std::size_t total = 0;
  for (const auto& f : fits) total += f.leaves.size();
  sc.anchors = Matrix(total, ds.dim());
  std::size_t id = 0;
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t l = 0; l < fits[c].leaves.size(); ++l) {
      const auto& leaf = fits[c].leaves[l];
      const auto centroid = fits[c].centroid(l);
      std::copy(centroid.begin(), centroid.end(), sc.anchors.row(id).begin());
      sc.anchor_label.push_back(c);
      sc.sizes.push_back(leaf.cf.n);
      sc.radii.push_back(leaf.cf.radius());
      for (const auto local : leaf.members) sc.assignment[rows[c][local]] = id;
      ++id;
    }
    sc.class_begin.push_back(id);
  }
  return sc;
}

AnchorStats anchor_stats(const SubClustering& sc) {
  AnchorStats s;
  s.total_anchors = sc.num_anchors();
  for (std::size_t c = 0; c < sc.num_classes(); ++c)
    s.per_class_counts.push_back(sc.class_begin[c + 1] - sc.class_begin[c]);
  for (std::size_t j = 0; j < sc.num_anchors(); ++j) {
    s.total_points += sc.sizes[j];
    s.max_radius = std::max(s.max_radius, sc.radii[j]);
    std::size_t bin = 0;
    while ((std::size_t{2} << bin) <= sc.sizes[j]) ++bin;
    if (s.size_histogram.size() <= bin) s.size_histogram.resize(bin + 1, 0);
    ++s.size_histogram[bin];
  }
  return s;
}

void write_anchor_dump(const SubClustering& sc, std::span<const std::string> class_names,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw PipelineError(fmt::format("cannot write '{}'", path.string()));
  out << "id,label,size,radius";
  for (std::size_t k = 0; k < sc.anchors.cols(); ++k) out << ",c" << k;
  out << '\n';
  for (std::size_t j = 0; j < sc.num_anchors(); ++j) {
    out << fmt::format("{},{},{},{}", j, class_names[sc.anchor_label[j]], sc.sizes[j], sc.radii[j]);
    for (const double v : sc.anchors.row(j)) out << fmt::format(",{}", v);
    out << '\n';
  }
}

}  // namespace clusterplot
