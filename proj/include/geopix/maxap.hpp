#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace geopix {

inline constexpr std::size_t kExactPolygonLimit = 15;
inline constexpr std::size_t kNaivePolygonLimit = 8;

struct PolygonizationResult {
  SimplePolygon polygon;
  std::vector<std::size_t> order;  // indices into the input, canonical cycle
  double area = 0.0;
  std::uint64_t explored = 0;
};

// Bottommost point, leftmost among ties.
inline std::size_t polygon_anchor(std::span<const Point> ps) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < ps.size(); ++i) {
    if (ps[i].y < ps[best].y || (ps[i].y == ps[best].y && ps[i].x < ps[best].x)) best = i;
  }
  return best;
}

// Rotates the cycle to start at the anchor and orients it counter-clockwise,
// so that equal cycles always yield bit-identical shoelace areas.
inline std::vector<std::size_t> canonical_cycle(std::span<const Point> ps, std::vector<std::size_t> order) {
  const std::size_t anchor = polygon_anchor(ps);
  const auto it = std::find(order.begin(), order.end(), anchor);
  if (it == order.end()) throw InvalidInput("cycle does not visit the anchor");
  std::rotate(order.begin(), it, order.end());
  std::vector<Point> v;
  for (std::size_t i : order) v.push_back(ps[i]);
  if (signed_area(v) < 0) std::reverse(order.begin() + 1, order.end());
  return order;
}

inline PolygonizationResult make_polygonization(std::span<const Point> ps, std::vector<std::size_t> order) {
  PolygonizationResult r;
  r.order = canonical_cycle(ps, std::move(order));
  for (std::size_t i : r.order) r.polygon.vertices.push_back(ps[i]);
  r.area = shoelace_area(r.polygon);
  return r;
}

namespace detail {

inline void check_polygon_input(std::span<const Point> ps, std::size_t limit, const char* solver) {
  if (ps.size() < 3) throw InvalidInput("polygonization needs at least 3 points");
  if (ps.size() > limit) {
    throw SizeLimitError(std::string(solver) + " supports at most " + std::to_string(limit) + " points");
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      if (ps[i] == ps[j]) throw InvalidInput("duplicate point");
    }
  }
  if (hull_points(std::vector<Point>(ps.begin(), ps.end())).size() < 3) {
    throw DegenerateGeometry("all points are collinear; no polygon exists");
  }
}

// True when (area, cycle) beats the incumbent: larger area, then the
// lexicographically smaller canonical cycle.
inline bool better_polygon(double area, const std::vector<std::size_t>& cycle, double best_area,
                           const std::vector<std::size_t>& best_cycle) {
  if (best_cycle.empty() || area > best_area) return true;
  return area == best_area && cycle < best_cycle;
}

class MaxAreaSearch {
 public:
  explicit MaxAreaSearch(std::span<const Point> ps) : ps_(ps), n_(ps.size()) {
    anchor_ = polygon_anchor(ps);
    const Point c = centroid(ps);
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::vector<double> angle(n_);
    for (std::size_t i = 0; i < n_; ++i) angle[i] = std::atan2(ps[i].y - c.y, ps[i].x - c.x);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });
    rank_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) rank_[order_[k]] = k;

    // blocks_[(u, v), (p, q)]: segment uv may not coexist with pq in a simple
    // polygon. Disjoint pairs block on any contact; pairs sharing a vertex
    // only when they overlap.
    blocks_.assign(n_ * n_ * n_ * n_, 0);
    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t v = 0; v < n_; ++v) {
        if (u == v) continue;
        for (std::size_t p = 0; p < n_; ++p) {
          for (std::size_t q = 0; q < n_; ++q) {
            if (p == q) continue;
            const bool shared = u == p || u == q || v == p || v == q;
            if (shared && std::min(u, v) == std::min(p, q) && std::max(u, v) == std::max(p, q)) continue;
            const auto kind = segment_intersect({ps[u], ps[v]}, {ps[p], ps[q]});
            const bool hit = shared ? kind == IntersectionKind::CollinearOverlap : kind != IntersectionKind::None;
            blocks_[index(u, v, p, q)] = hit;
          }
        }
      }
    }
  }

  PolygonizationResult run() {
    used_.assign(n_, false);
    used_[anchor_] = true;
    path_.assign(1, anchor_);
    dfs();
    auto r = make_polygonization(ps_, best_cycle_);
    r.explored = explored_;
    return r;
  }

 private:
  std::size_t index(std::size_t u, std::size_t v, std::size_t p, std::size_t q) const {
    return ((u * n_ + v) * n_ + p) * n_ + q;
  }

  bool extension_blocked(std::size_t v) const {
    const std::size_t u = path_.back();
    for (std::size_t i = 0; i + 1 < path_.size(); ++i) {
      if (blocks_[index(u, v, path_[i], path_[i + 1])]) return true;
    }
    return false;
  }

  bool closing_blocked() const {
    const std::size_t u = path_.back(), v = path_.front();
    for (std::size_t i = 0; i + 1 < path_.size(); ++i) {
      if (blocks_[index(u, v, path_[i], path_[i + 1])]) return true;
    }
    return false;
  }

  void dfs() {
    ++explored_;
    if (path_.size() == n_) {
      if (rank_[path_[1]] > rank_[path_.back()]) return;  // mirror image of another branch
      if (closing_blocked()) return;
      auto cycle = canonical_cycle(ps_, path_);
      std::vector<Point> v;
      for (std::size_t i : cycle) v.push_back(ps_[i]);
      const double area = shoelace_area(v);
      if (better_polygon(area, cycle, best_area_, best_cycle_)) {
        best_area_ = area;
        best_cycle_ = std::move(cycle);
      }
      return;
    }
    if (path_.size() >= 2) {
      bool closable = false;
      for (std::size_t w = 0; w < n_ && !closable; ++w) closable = !used_[w] && rank_[w] > rank_[path_[1]];
      if (!closable) return;
    }
    for (std::size_t v : order_) {
      if (used_[v] || extension_blocked(v)) continue;
      used_[v] = true;
      path_.push_back(v);
      dfs();
      path_.pop_back();
      used_[v] = false;
    }
  }

  std::span<const Point> ps_;
  std::size_t n_;
  std::size_t anchor_ = 0;
  std::vector<std::size_t> order_, rank_;
  std::vector<std::uint8_t> blocks_;
  std::vector<bool> used_;
  std::vector<std::size_t> path_;
  std::vector<std::size_t> best_cycle_;
  double best_area_ = 0.0;
  std::uint64_t explored_ = 0;
};

}  // namespace detail

// Exhaustive backtracking from the bottommost-leftmost anchor; extensions
// follow the angular order around the centroid and are rejected as soon as
// the new edge meets an earlier one.
inline PolygonizationResult solve_exact_dfs(std::span<const Point> ps) {
  detail::check_polygon_input(ps, kExactPolygonLimit, "exact polygon search");
  return detail::MaxAreaSearch(ps).run();
}

// Brute force over every permutation with vertex 0 first and a fixed
// direction, checked with is_simple_polygon.
inline PolygonizationResult solve_naive_oracle(std::span<const Point> ps) {
  detail::check_polygon_input(ps, kNaivePolygonLimit, "naive polygon oracle");
  const std::size_t n = ps.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best_cycle;
  double best_area = 0.0;
  std::uint64_t explored = 0;
  std::vector<Point> v(n);
  do {
    if (perm[1] > perm[n - 1]) continue;
    ++explored;
    for (std::size_t i = 0; i < n; ++i) v[i] = ps[perm[i]];
    if (!is_simple_polygon(v)) continue;
    auto cycle = canonical_cycle(ps, perm);
    for (std::size_t i = 0; i < n; ++i) v[i] = ps[cycle[i]];
    const double area = shoelace_area(v);
    if (detail::better_polygon(area, cycle, best_area, best_cycle)) {
      best_area = area;
      best_cycle = std::move(cycle);
    }
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  auto r = make_polygonization(ps, best_cycle);
  r.explored = explored;
  return r;
}

inline constexpr int kRandomPolygonAttempts = 1000;

// Rejection sampling over random permutations; when that fails, a star-shaped
// polygon from the angular order around a random interior point.
inline PolygonizationResult random_simple_polygon(std::span<const Point> ps, std::uint64_t seed) {
  const std::size_t n = ps.size();
  if (n < 3) throw InvalidInput("polygonization needs at least 3 points");
  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<Point> v(n);
  for (int attempt = 0; attempt < kRandomPolygonAttempts; ++attempt) {
    rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t i = 0; i < n; ++i) v[i] = ps[perm[i]];
    if (is_simple_polygon(v)) return make_polygonization(ps, perm);
  }
  for (int attempt = 0; attempt <= kRandomPolygonAttempts; ++attempt) {
    Point c;
    if (attempt < kRandomPolygonAttempts) {
      double total = 0.0;
      for (const Point& p : ps) {
        const double w = rng.uniform(0.05, 1.0);
        c = c + w * p;
        total += w;
      }
      c = c / total;
    } else {
      c = centroid(ps);
    }
    std::vector<double> angle(n);
    for (std::size_t i = 0; i < n; ++i) angle[i] = std::atan2(ps[i].y - c.y, ps[i].x - c.x);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });
    for (std::size_t i = 0; i < n; ++i) v[i] = ps[perm[i]];
    if (is_simple_polygon(v)) return make_polygonization(ps, perm);
  }
  throw DegenerateGeometry("no simple polygon found for the given points");
}

}  // namespace geopix
