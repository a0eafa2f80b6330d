#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "clusterplot/error.hpp"
#include "clusterplot/geometry.hpp"

namespace clusterplot {
namespace {

double orient(Point2 a, Point2 b, Point2 c) noexcept { return cross(b - a, c - a); }

// > 0 when d lies strictly inside the circumcircle of counter-clockwise abc.
double incircle(Point2 a, Point2 b, Point2 c, Point2 d) noexcept {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

constexpr std::int32_t kNone = -1;

struct Tri {
  std::array<std::uint32_t, 3> v;
  std::array<std::int32_t, 3> n;  // n[i] is across the edge opposite v[i]
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) noexcept {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

class Triangulator {
 public:
  explicit Triangulator(std::span<const Point2> pts) : pts_(pts) {}

  std::vector<Triangle> run() {
    std::vector<std::uint32_t> order(pts_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      const Point2 p = pts_[a], q = pts_[b];
      return p.x < q.x || (p.x == q.x && (p.y < q.y || (p.y == q.y && a < b)));
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::uint32_t a, std::uint32_t b) { return pts_[a] == pts_[b]; }),
                order.end());
    if (order.size() < 3) return {};

    std::size_t apex = 2;
    while (apex < order.size() && orient(pts_[order[0]], pts_[order[1]], pts_[order[apex]]) == 0.0) ++apex;
    if (apex == order.size()) return {};
    seed_fan(order, apex);
    for (std::size_t m = apex + 1; m < order.size(); ++m) insert_outside(order[m]);

    // Local legalisation already runs per insertion; a bounded global sweep
    // catches anything left by rounding.
    for (int pass = 0; pass < 64; ++pass) {
      bool flipped = false;
      for (std::size_t t = 0; t < tris_.size(); ++t)
        for (int i = 0; i < 3; ++i) flipped |= flip_if_illegal(static_cast<std::int32_t>(t), i);
      if (!flipped) break;
    }

    std::vector<Triangle> out;
    out.reserve(tris_.size());
    for (const auto& t : tris_) out.push_back(t.v);
    return out;
  }

 private:
  Point2 P(std::uint32_t i) const { return pts_[i]; }

  std::int32_t add(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
    tris_.push_back({{a, b, c}, {kNone, kNone, kNone}});
    return static_cast<std::int32_t>(tris_.size() - 1);
  }

  // Records that the directed edge a->b (interior on its left) of triangle t
  // currently lies on the hull.
  void set_hull_edge(std::uint32_t a, std::uint32_t b, std::int32_t t) { hull_tri_[edge_key(a, b)] = t; }

  void link(std::int32_t t, int i, std::int32_t u) {
    tris_[t].n[i] = u;
    if (u == kNone) {
      const auto& v = tris_[t].v;
      set_hull_edge(v[(i + 1) % 3], v[(i + 2) % 3], t);
    }
  }

  void seed_fan(const std::vector<std::uint32_t>& order, std::size_t apex_pos) {
    const std::uint32_t apex = order[apex_pos];
    const bool left = orient(P(order[0]), P(order[1]), P(apex)) > 0.0;
    std::int32_t prev = kNone;
    for (std::size_t i = 0; i + 1 < apex_pos; ++i) {
      const std::uint32_t a = order[i], b = order[i + 1];
      // left: (a, b, apex); right: (b, a, apex). Shared fan edges run to apex.
      const std::int32_t t = left ? add(a, b, apex) : add(b, a, apex);
      link(t, 2, kNone);
      if (left) {
        link(t, 1, prev);  // edge (apex, a)
        if (prev != kNone) tris_[prev].n[0] = t;
      } else {
        link(t, 0, prev);  // edge (a, apex)
        if (prev != kNone) tris_[prev].n[1] = t;
      }
      prev = t;
    }
    // Close the outer fan edges at both ends of the chain.
    const std::int32_t first = 0, last = prev;
    if (left) {
      link(last, 0, kNone);   // (b_last, apex)
      link(first, 1, kNone);  // (apex, a_first)
      hull_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(apex_pos));
      hull_.push_back(apex);
    } else {
      link(last, 1, kNone);   // (apex, b_last)
      link(first, 0, kNone);  // (a_first, apex)
      hull_.clear();
      hull_.push_back(order[0]);
      hull_.push_back(apex);
      for (std::size_t i = apex_pos - 1; i >= 1; --i) hull_.push_back(order[i]);
    }
  }

  void insert_outside(std::uint32_t p) {
    const std::size_t h = hull_.size();
    auto visible = [&](std::size_t i) { return orient(P(hull_[i]), P(hull_[(i + 1) % h]), P(p)) < 0.0; };
    std::size_t start = h;
    for (std::size_t i = 0; i < h; ++i)
      if (visible(i) && !visible((i + h - 1) % h)) {
        start = i;
        break;
      }
    if (start == h) return;  // cannot happen for lexicographically sorted input

    std::vector<std::int32_t> created;
    std::size_t count = 0;
    for (std::size_t i = start; visible(i % h) && count < h; ++i, ++count) {
      const std::uint32_t a = hull_[i % h], b = hull_[(i + 1) % h];
      const auto key = edge_key(a, b);
      const std::int32_t outer = hull_tri_.at(key);
      hull_tri_.erase(key);
      const std::int32_t t = add(b, a, p);
      tris_[t].n[2] = outer;
      for (int k = 0; k < 3; ++k)
        if (tris_[outer].v[k] != a && tris_[outer].v[k] != b) tris_[outer].n[k] = t;
      if (!created.empty()) {
        tris_[created.back()].n[1] = t;
        tris_[t].n[0] = created.back();
      }
      created.push_back(t);
    }
    link(created.front(), 0, kNone);  // (a_start, p)
    link(created.back(), 1, kNone);   // (p, b_end)

    // Hull: a_start, p, b_end replaces the visible chain.
    const std::size_t end = start + count;  // index (unwrapped) of b_end
    std::vector<std::uint32_t> next;
    next.reserve(h + 1);
    next.push_back(hull_[start]);
    next.push_back(p);
    for (std::size_t i = end; i < start + h; ++i) next.push_back(hull_[i % h]);
    hull_ = std::move(next);

    for (const auto t : created) legalize(t, 2);
  }

  void legalize(std::int32_t t, int i) {
    if (++flip_budget_ > 64 * (pts_.size() + 16) * (pts_.size() + 16)) return;
    if (!flip_if_illegal(t, i)) return;
    // After a flip the new point sits at index 0 of both triangles.
    const std::int32_t u = tris_[t].n[1];
    legalize(t, 0);
    legalize(u, 0);
  }

  // Flips the edge opposite tris_[t].v[i] when the opposite vertex of the
  // neighbour lies inside the circumcircle. Afterwards t = (p, a, q) and the
  // neighbour u = (p, q, b), u stored in t.n[1].
  bool flip_if_illegal(std::int32_t t, int i) {
    const std::int32_t u = tris_[t].n[i];
    if (u == kNone) return false;
    int j = 0;
    while (tris_[u].n[j] != t) ++j;
    const std::uint32_t p = tris_[t].v[i];
    const std::uint32_t a = tris_[t].v[(i + 1) % 3];
    const std::uint32_t b = tris_[t].v[(i + 2) % 3];
    const std::uint32_t q = tris_[u].v[j];
    if (!(incircle(P(p), P(a), P(b), P(q)) > 0.0)) return false;
    if (!(orient(P(p), P(a), P(q)) > 0.0) || !(orient(P(p), P(q), P(b)) > 0.0)) return false;

    const std::int32_t t_opp_a = tris_[t].n[(i + 1) % 3];  // edge (b, p)
    const std::int32_t t_opp_b = tris_[t].n[(i + 2) % 3];  // edge (p, a)
    // u = (q, b, a) rotated so that v[j] = q.
    const std::int32_t u_opp_b = tris_[u].n[(j + 1) % 3];  // edge (a, q)
    const std::int32_t u_opp_a = tris_[u].n[(j + 2) % 3];  // edge (q, b)

    tris_[t].v = {p, a, q};
    tris_[u].v = {p, q, b};
    link(t, 0, u_opp_b);
    link(t, 1, u);
    link(t, 2, t_opp_b);
    link(u, 0, u_opp_a);
    link(u, 1, t_opp_a);
    link(u, 2, t);
    repoint(u_opp_b, u, t);
    repoint(t_opp_a, t, u);
    return true;
  }

  void repoint(std::int32_t tri, std::int32_t from, std::int32_t to) {
    if (tri == kNone) return;
    for (auto& n : tris_[tri].n)
      if (n == from) n = to;
  }

  std::span<const Point2> pts_;
  std::vector<Tri> tris_;
  std::vector<std::uint32_t> hull_;  // counter-clockwise
  std::unordered_map<std::uint64_t, std::int32_t> hull_tri_;
  std::size_t flip_budget_ = 0;
};

}  // namespace

std::vector<Triangle> delaunay(std::span<const Point2> pts) { return Triangulator(pts).run(); }

}  // namespace clusterplot
