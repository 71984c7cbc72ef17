#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace geopix {

// Planar geometry primitives shared by the solvers, rasterizers and
// extractors. All predicates are tolerance based: a point counts as lying on
// a line when its distance to that line is at most `eps` (same units as the
// coordinates).

inline constexpr double kGeomEps = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend Point operator*(Point a, double s) { return {s * a.x, s * a.y}; }
  friend Point operator/(Point a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Point a, Point b) = default;
  friend auto operator<=>(Point a, Point b) = default;
};

using PointSet = std::vector<Point>;

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

inline Point rotate(Point p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

inline Point rotate_about(Point p, Point center, double angle) {
  return center + rotate(p - center, angle);
}

// Twice the signed area of triangle abc; > 0 when counter-clockwise.
inline double orient2d(Point a, Point b, Point c) { return cross(b - a, c - a); }

// -1, 0 or +1. Zero when c is within eps of the line through a and b.
inline int orientation(Point a, Point b, Point c, double eps = kGeomEps) {
  const double len = distance(a, b);
  const double value = orient2d(a, b, c);
  if (len == 0.0) return distance(a, c) <= eps ? 0 : 1;
  if (std::abs(value) <= eps * len) return 0;
  return value > 0 ? 1 : -1;
}

struct Segment {
  Point a;
  Point b;

  double length() const { return distance(a, b); }
};

enum class IntersectionKind { None, Proper, EndpointTouch, CollinearOverlap };

inline const char* to_string(IntersectionKind k) {
  switch (k) {
    case IntersectionKind::None: return "None";
    case IntersectionKind::Proper: return "Proper";
    case IntersectionKind::EndpointTouch: return "EndpointTouch";
    case IntersectionKind::CollinearOverlap: return "CollinearOverlap";
  }
  return "?";
}

namespace detail {

// p assumed (near) collinear with s; true when its projection falls inside s.
inline bool within_segment(const Segment& s, Point p, double eps) {
  const Point d = s.b - s.a;
  const double len = norm(d);
  if (len == 0.0) return distance(s.a, p) <= eps;
  const double t = dot(p - s.a, d) / len;
  return t >= -eps && t <= len + eps;
}

}  // namespace detail

inline IntersectionKind segment_intersect(const Segment& s1, const Segment& s2,
                                          double eps = kGeomEps) {
  const int o1 = orientation(s1.a, s1.b, s2.a, eps);
  const int o2 = orientation(s1.a, s1.b, s2.b, eps);
  const int o3 = orientation(s2.a, s2.b, s1.a, eps);
  const int o4 = orientation(s2.a, s2.b, s1.b, eps);

  if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
    // Pick the reference axis independently of argument order.
    const auto key = [](const Segment& s) {
      return std::make_tuple(s.length(), s.a.x, s.a.y, s.b.x, s.b.y);
    };
    const Segment& ref = key(s1) >= key(s2) ? s1 : s2;
    const double len = ref.length();
    if (len == 0.0) {
      return distance(s1.a, s2.a) <= eps ? IntersectionKind::EndpointTouch
                                         : IntersectionKind::None;
    }
    const Point u = (ref.b - ref.a) / len;
    auto interval = [&](const Segment& s) {
      const double p = dot(s.a - ref.a, u), q = dot(s.b - ref.a, u);
      return std::pair{std::min(p, q), std::max(p, q)};
    };
    const auto [lo1, hi1] = interval(s1);
    const auto [lo2, hi2] = interval(s2);
    const double overlap = std::min(hi1, hi2) - std::max(lo1, lo2);
    if (overlap > eps) return IntersectionKind::CollinearOverlap;
    if (overlap >= -eps) return IntersectionKind::EndpointTouch;
    return IntersectionKind::None;
  }

  if (o1 * o2 < 0 && o3 * o4 < 0) return IntersectionKind::Proper;

  if ((o1 == 0 && detail::within_segment(s1, s2.a, eps)) ||
      (o2 == 0 && detail::within_segment(s1, s2.b, eps)) ||
      (o3 == 0 && detail::within_segment(s2, s1.a, eps)) ||
      (o4 == 0 && detail::within_segment(s2, s1.b, eps))) {
    return IntersectionKind::EndpointTouch;
  }
  return IntersectionKind::None;
}

inline double point_segment_distance(Point p, const Segment& s) {
  const Point d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return distance(p, s.a + t * d);
}

// Ordered point list; closed polylines have an implicit closing segment.
struct Polyline {
  std::vector<Point> points;
  bool closed = false;

  std::size_t segment_count() const {
    if (points.size() < 2) return 0;
    return closed ? points.size() : points.size() - 1;
  }
  Segment segment(std::size_t i) const {
    return {points[i], points[(i + 1) % points.size()]};
  }
};

// Drops consecutive duplicates (and a repeated closing point). Closed
// polylines need at least three distinct points.
inline Polyline make_polyline(std::vector<Point> points, bool closed) {
  auto last = std::unique(points.begin(), points.end());
  points.erase(last, points.end());
  if (closed && points.size() > 1 && points.front() == points.back()) points.pop_back();
  if (closed && points.size() < 3) {
    throw InvalidInput("closed polyline needs at least 3 distinct points");
  }
  return Polyline{std::move(points), closed};
}

inline double point_to_polyline_distance(Point p, const Polyline& c) {
  if (c.points.empty()) throw InvalidInput("distance to an empty polyline");
  if (c.points.size() == 1) return distance(p, c.points.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.segment_count(); ++i) {
    best = std::min(best, point_segment_distance(p, c.segment(i)));
  }
  return best;
}

inline double signed_area(std::span<const Point> v) {
  double twice = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    twice += cross(v[i], v[(i + 1) % n]);
  }
  return 0.5 * twice;
}

// Vertex cycle with an implicit closing edge.
struct SimplePolygon {
  std::vector<Point> vertices;
};

inline double shoelace_area(std::span<const Point> v) {
  if (v.size() < 3) throw InvalidInput("polygon area needs at least 3 vertices");
  return std::abs(signed_area(v));
}

inline double shoelace_area(const SimplePolygon& poly) { return shoelace_area(poly.vertices); }

namespace detail {

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
// May return fewer than 3 points for degenerate input.
inline std::vector<Point> hull_points(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && orient2d(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient2d(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace detail

inline SimplePolygon convex_hull(std::span<const Point> ps) {
  if (ps.size() < 3) throw InvalidInput("convex hull needs at least 3 points");
  auto h = detail::hull_points({ps.begin(), ps.end()});
  if (h.size() < 3 || std::abs(signed_area(h)) <= kGeomEps * kGeomEps) {
    throw DegenerateGeometry("convex hull of collinear points");
  }
  return SimplePolygon{std::move(h)};
}

// Crossing-number test; boundary points count as inside when within eps.
inline bool point_in_polygon(Point p, std::span<const Point> poly, double eps = kGeomEps) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(p, {poly[i], poly[(i + 1) % n]}) <= eps) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

// Vertices plus straight-line edges; terminals flagged per vertex.
struct PlaneGraph {
  using Edge = std::pair<std::size_t, std::size_t>;

  std::vector<Point> vertices;
  std::vector<Edge> edges;
  std::vector<bool> terminal;

  std::size_t add_vertex(Point p, bool is_terminal) {
    vertices.push_back(p);
    terminal.push_back(is_terminal);
    return vertices.size() - 1;
  }

  // Stores (min, max); rejects self-loops, duplicates and bad indices.
  void add_edge(std::size_t i, std::size_t j) {
    if (i >= vertices.size() || j >= vertices.size()) throw InvalidInput("edge index out of range");
    if (i == j) throw InvalidInput("self-loop edge");
    const Edge e{std::min(i, j), std::max(i, j)};
    if (has_edge(e.first, e.second)) throw InvalidInput("duplicate edge");
    edges.push_back(e);
  }

  bool has_edge(std::size_t i, std::size_t j) const {
    const Edge e{std::min(i, j), std::max(i, j)};
    return std::find(edges.begin(), edges.end(), e) != edges.end();
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(vertices.size(), 0);
    for (const auto& [a, b] : edges) {
      ++d[a];
      ++d[b];
    }
    return d;
  }

  std::vector<std::vector<std::size_t>> adjacency() const {
    std::vector<std::vector<std::size_t>> adj(vertices.size());
    for (const auto& [a, b] : edges) {
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    return adj;
  }

  Segment segment(const Edge& e) const { return {vertices[e.first], vertices[e.second]}; }

  double total_length() const {
    double sum = 0.0;
    for (const auto& e : edges) sum += segment(e).length();
    return sum;
  }

  std::size_t terminal_count() const {
    return static_cast<std::size_t>(std::count(terminal.begin(), terminal.end(), true));
  }
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline bool is_tree(const PlaneGraph& g) {
  const std::size_t n = g.vertices.size();
  if (n == 0 || g.edges.size() != n - 1) return false;
  DisjointSets sets(n);
  for (const auto& [a, b] : g.edges) {
    if (a >= n || b >= n || !sets.unite(a, b)) return false;
  }
  return true;
}

// Kruskal over the complete Euclidean graph. Ties fall back to the
// lexicographic order of (i, j) so the result is deterministic.
inline PlaneGraph minimum_spanning_tree(std::span<const Point> ps) {
  if (ps.size() < 2) throw InvalidInput("spanning tree needs at least 2 points");
  struct Candidate {
    double length;
    std::size_t i, j;
  };
  std::vector<Candidate> all;
  all.reserve(ps.size() * (ps.size() - 1) / 2);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) all.push_back({distance(ps[i], ps[j]), i, j});
  }
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.length, a.i, a.j) < std::tie(b.length, b.i, b.j);
  });
  PlaneGraph g;
  for (const Point& p : ps) g.add_vertex(p, true);
  DisjointSets sets(ps.size());
  for (const auto& c : all) {
    if (sets.unite(c.i, c.j)) {
      g.edges.emplace_back(c.i, c.j);
      if (g.edges.size() + 1 == ps.size()) break;
    }
  }
  return g;
}

inline bool is_simple_polygon(std::span<const Point> v, double eps = kGeomEps) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (distance(v[i], v[j]) <= eps) return false;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Segment si{v[i], v[(i + 1) % n]};
    for (std::size_t j = i + 1; j < n; ++j) {
      const Segment sj{v[j], v[(j + 1) % n]};
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const auto kind = segment_intersect(si, sj, eps);
      if (adjacent ? kind == IntersectionKind::CollinearOverlap : kind != IntersectionKind::None) {
        return false;
      }
    }
  }
  return true;
}

// Oriented rectangle; corners listed counter-clockwise.
struct RotatedRect {
  Point center;
  double width = 0.0;   // along `angle`
  double height = 0.0;  // perpendicular to `angle`
  double angle = 0.0;   // radians

  double area() const { return width * height; }

  std::array<Point, 4> corners() const {
    const Point u{std::cos(angle), std::sin(angle)};
    const Point v{-u.y, u.x};
    const Point hu = 0.5 * width * u, hv = 0.5 * height * v;
    return {center - hu - hv, center + hu - hv, center + hu + hv, center - hu + hv};
  }
};

// Minimum-area enclosing rectangle: one side is collinear with a hull edge.
inline RotatedRect min_area_rect(std::span<const Point> pts) {
  if (pts.empty()) throw InvalidInput("min_area_rect of empty point set");
  const auto hull = detail::hull_points({pts.begin(), pts.end()});
  if (hull.size() == 1) return RotatedRect{hull[0], 0.0, 0.0, 0.0};

  RotatedRect best;
  double best_area = std::numeric_limits<double>::infinity();
  const std::size_t h = hull.size();
  for (std::size_t i = 0; i < (h == 2 ? 1 : h); ++i) {
    const Point edge = hull[(i + 1) % h] - hull[i];
    const double len = norm(edge);
    if (len == 0.0) continue;
    const Point u = edge / len, v{-u.y, u.x};
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const Point& p : hull) {
      const double a = dot(p, u), b = dot(p, v);
      umin = std::min(umin, a);
      umax = std::max(umax, a);
      vmin = std::min(vmin, b);
      vmax = std::max(vmax, b);
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area - 1e-12) {
      best_area = area;
      const double cu = 0.5 * (umin + umax), cv = 0.5 * (vmin + vmax);
      best = RotatedRect{cu * u + cv * v, umax - umin, vmax - vmin, std::atan2(u.y, u.x)};
    }
  }
  return best;
}

inline Point centroid(std::span<const Point> ps) {
  Point c;
  for (const Point& p : ps) c = c + p;
  return ps.empty() ? c : c / static_cast<double>(ps.size());
}

// Smallest angle between two directions, in [0, pi].
inline double angle_between(Point u, Point v) {
  return std::abs(std::atan2(cross(u, v), dot(u, v)));
}

}  // namespace geopix
