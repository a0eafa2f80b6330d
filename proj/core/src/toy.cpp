#include "clusterplot/toy.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "clusterplot/error.hpp"
#include "clusterplot/random.hpp"

namespace clusterplot {

namespace {

using Vec3 = std::array<double, 3>;

// Box-Muller on uniform01 so the streams do not depend on the standard
// library's distribution implementation.
class Normal {
 public:
  explicit Normal(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    while (u <= 0.0) u = uniform01(rng_);
    const double v = uniform01(rng_);
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * std::numbers::pi * v);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * v);
  }

  double uniform() { return uniform01(rng_); }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Builder {
  LabeledDataset ds;
  std::vector<double> values;
  std::size_t dim;

  Builder(std::vector<std::string> names, std::size_t d) : dim(d) { ds.class_names = std::move(names); }

  void add(std::span<const double> p, std::size_t label) {
    values.insert(values.end(), p.begin(), p.end());
    ds.labels.push_back(label);
  }

  LabeledDataset finish() {
    ds.points = Matrix(ds.labels.size(), dim);
    std::copy(values.begin(), values.end(), ds.points.values().begin());
    ds.validate();
    return std::move(ds);
  }
};

// A point uniform in a disk of the given radius, in the plane spanned by u, w.
Vec3 disk_offset(Normal& g, const Vec3& u, const Vec3& w, double radius) {
  const double r = radius * std::sqrt(g.uniform());
  const double t = 2.0 * std::numbers::pi * g.uniform();
  const double a = r * std::cos(t), b = r * std::sin(t);
  return {a * u[0] + b * w[0], a * u[1] + b * w[1], a * u[2] + b * w[2]};
}

}  // namespace

LabeledDataset make_hourglass(std::size_t n, std::uint64_t seed) {
  if (n < 20) throw ConfigError("hourglass needs at least 20 points");
  Normal g(module_seed(seed, "toy.hourglass"));
  Builder b({"blue", "orange"}, 3);
  const std::size_t orange = n / 5;
  const std::size_t blue = n - orange;
  const std::size_t neck = blue / 8;
  const std::size_t lobe = (blue - neck) / 2;

  for (std::size_t i = 0; i < blue; ++i) {
    Vec3 p;
    if (i < 2 * lobe) {
      const double cz = i < lobe ? 5.0 : -5.0;
      p = {g(), g(), cz + g()};
    } else {
      const Vec3 off = disk_offset(g, {1, 0, 0}, {0, 1, 0}, 0.6);
      p = {off[0], off[1], -4.0 + 8.0 * g.uniform()};
    }
    b.add(p, 0);
  }
  for (std::size_t i = 0; i < orange; ++i) {
    const Vec3 p{1.6 + 0.35 * g(), 0.35 * g(), 0.35 * g()};
    b.add(p, 1);
  }
  return b.finish();
}

LabeledDataset make_cross(std::size_t n, std::uint64_t seed) {
  constexpr std::size_t arms = 7;
  if (n < 10 * arms * 3) throw ConfigError("cross needs at least 210 points");
  Normal g(module_seed(seed, "toy.cross"));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < arms; ++k) names.push_back(fmt::format("arm{}", k));
  Builder b(std::move(names), 3);

  // Weights 10^(k/6): the densest arm has ten times the sparsest one.
  std::array<double, arms> weight{};
  double total = 0.0;
  for (std::size_t k = 0; k < arms; ++k) total += weight[k] = std::pow(10.0, static_cast<double>(k) / 6.0);
  std::array<std::size_t, arms> count{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < arms; ++k) assigned += count[k] = static_cast<std::size_t>(n * weight[k] / total);
  count[arms - 1] += n - assigned;

  constexpr double start = 1.0, length = 10.0, radius = 1.5;
  const double tilt = std::numbers::pi / 6.0;
  for (std::size_t k = 0; k < arms; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / arms;
    const double up = (k % 2 == 0 ? 1.0 : -1.0) * tilt;
    const Vec3 dir{std::cos(up) * std::cos(phi), std::cos(up) * std::sin(phi), std::sin(up)};
    const Vec3 side{-std::sin(phi), std::cos(phi), 0.0};
    const Vec3 normal{dir[1] * side[2] - dir[2] * side[1], dir[2] * side[0] - dir[0] * side[2],
                      dir[0] * side[1] - dir[1] * side[0]};
    for (std::size_t i = 0; i < count[k]; ++i) {
      const double s = start + length * g.uniform();
      const Vec3 off = disk_offset(g, side, normal, radius);
      const Vec3 p{s * dir[0] + off[0], s * dir[1] + off[1], s * dir[2] + off[2]};
      b.add(p, k);
    }
  }
  return b.finish();
}

LabeledDataset make_gaussians(const ToyParams& params, std::uint64_t seed) {
  const std::size_t m = params.classes;
  if (m < 2) throw ConfigError("gaussians needs at least 2 classes");
  if (params.n < 2 * m) throw ConfigError("gaussians needs at least 2 points per class");
  if (!(params.sigma > 0.0) || !(params.separation >= 0.0))
    throw ConfigError("gaussians needs sigma > 0 and separation >= 0");
  const std::size_t dim = std::max({params.dim, m, std::size_t{2}});
  Normal g(module_seed(seed, "toy.gaussians"));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < m; ++c) names.push_back(fmt::format("g{}", c));
  Builder b(std::move(names), dim);

  // Scaled unit vectors e_c sit sqrt(2) * scale apart.
  const double scale = params.separation * params.sigma / std::numbers::sqrt2;
  std::vector<double> p(dim);
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t count = params.n / m + (c == 0 ? params.n % m : 0);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t d = 0; d < dim; ++d) p[d] = params.sigma * g() + (d == c ? scale : 0.0);
      b.add(p, c);
    }
  }
  return b.finish();
}

LabeledDataset generate_toy(const std::string& name, const ToyParams& params, std::uint64_t seed) {
  if (name == "hourglass") return make_hourglass(params.n, seed);
  if (name == "cross") return make_cross(params.n, seed);
  if (name == "gaussians") return make_gaussians(params, seed);
  throw ConfigError(fmt::format("unknown toy '{}' (expected hourglass, cross or gaussians)", name));
}

}  // namespace clusterplot
