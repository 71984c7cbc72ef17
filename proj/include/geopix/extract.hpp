#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "imgproc.hpp"
#include "metrics.hpp"
#include "raster.hpp"

namespace geopix {

struct SnapParams {
  double theta_min = -0.10;
  double theta_max = 0.10;
  double theta_step = 0.01;
  int translation_radius = 3;  // pixels

  void validate() const {
    if (!(theta_step > 0.0)) throw InvalidInput("theta_step must be positive");
    if (theta_max < theta_min) throw InvalidInput("theta_max below theta_min");
    if (translation_radius < 0) throw InvalidInput("translation radius must be non-negative");
  }
};

struct ExtractionThresholds {
  std::uint8_t binarize_white = 192;
  std::uint8_t binarize_black = 64;
  double edge_fraction = 0.7;
  double snap_radius = 3.0;
  double close_vertex_dist = 5.0;
  double collinear_angle = 0.12;
  double endpoint_exclusion = 3.0;

  void validate() const {
    if (!(edge_fraction > 0.0 && edge_fraction <= 1.0)) throw InvalidInput("edge_fraction must be in (0, 1]");
    if (snap_radius < 0 || close_vertex_dist < 0 || collinear_angle < 0 || endpoint_exclusion < 0) {
      throw InvalidInput("extraction thresholds must be non-negative");
    }
  }
};

// ---------------------------------------------------------------------------
// Squares.

inline Quad extract_square(const GrayImage& mask) {
  const auto contour = mask_contour(mask);
  return Quad::from_rect(min_area_rect(contour));
}

struct SnapResult {
  Quad quad;
  double theta = 0.0;
  Point translation;
  double score = 0.0;
};

// Grid search over rotations about the quad center and integer pixel
// translations. The identity is always evaluated first and only strictly
// better candidates replace it.
inline SnapResult snap_square_detailed(const Quad& q, const Polyline& curve, const SnapParams& params = {}) {
  params.validate();
  const Point c = q.center();
  SnapResult best{q, 0.0, {0, 0}, alignment_score(q, curve)};
  const int steps = static_cast<int>(std::floor((params.theta_max - params.theta_min) / params.theta_step + 1e-9));
  const int t = params.translation_radius;
  Quad cand;
  for (int k = 0; k <= steps; ++k) {
    const double theta = params.theta_min + k * params.theta_step;
    std::array<Point, 4> rotated;
    for (int i = 0; i < 4; ++i) rotated[i] = rotate_about(q.vertices[i], c, theta);
    for (int dy = -t; dy <= t; ++dy) {
      for (int dx = -t; dx <= t; ++dx) {
        const Point shift{static_cast<double>(dx), static_cast<double>(dy)};
        for (int i = 0; i < 4; ++i) cand.vertices[i] = rotated[i] + shift;
        const double score = alignment_score(cand, curve);
        if (score > best.score) best = {cand, theta, shift, score};
      }
    }
  }
  return best;
}

inline Quad snap_square(const Quad& q, const Polyline& curve, const SnapParams& params = {}) {
  return snap_square_detailed(q, curve, params).quad;
}

// ---------------------------------------------------------------------------
// Graphs.

struct DetectedNode {
  Point position;  // pixel coordinates
  std::optional<std::size_t> terminal;
};

inline std::vector<DetectedNode> detect_nodes(const GrayImage& img, const std::vector<Point>& terminals,
                                              const ExtractionThresholds& th = {}) {
  const BinaryMask dark(img, [&](std::uint8_t v) { return v <= th.binarize_black; });
  std::vector<DetectedNode> nodes;
  for (const auto& comp : connected_components(dark)) {
    DetectedNode node{comp.centroid(), std::nullopt};
    double best = th.snap_radius;
    for (std::size_t t = 0; t < terminals.size(); ++t) {
      const double d = distance(node.position, terminals[t]);
      if (d <= best) {
        best = d;
        node.terminal = t;
      }
    }
    if (node.terminal) {
      node.position = terminals[*node.terminal];
      const bool dup = std::any_of(nodes.begin(), nodes.end(),
                                   [&](const DetectedNode& n) { return n.terminal == node.terminal; });
      if (dup) continue;
    }
    nodes.push_back(node);
  }
  return nodes;
}

namespace detail {

// Distance in pixels within which a point counts as lying on a drawn line.
inline constexpr double kStrokeReach = 2.0;

inline bool white_dilated(const GrayImage& img, int col, int row, std::uint8_t white) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (img.contains(col + dx, row + dy) && img.at(col + dx, row + dy) >= white) return true;
    }
  }
  return false;
}

// Fraction of Bresenham samples between a and b that are white (within one
// pixel when dilated), ignoring samples within the exclusion radius of either
// endpoint. Returns nullopt when nothing is left to sample.
inline std::optional<double> line_support(const GrayImage& img, Point a, Point b, const ExtractionThresholds& th,
                                          bool dilate = true) {
  std::size_t total = 0, hits = 0;
  bresenham(to_pixel(a), to_pixel(b), [&](int x, int y) {
    const Point c = pixel_center(x, y);
    if (distance(c, a) <= th.endpoint_exclusion || distance(c, b) <= th.endpoint_exclusion) return;
    ++total;
    hits += dilate ? white_dilated(img, x, y, th.binarize_white) : img.at(x, y) >= th.binarize_white;
  });
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

inline bool supported(const GrayImage& img, Point a, Point b, const ExtractionThresholds& th) {
  const auto f = line_support(img, a, b, th);
  return f && *f > th.edge_fraction;
}

}  // namespace detail

inline PlaneGraph extract_graph(const GrayImage& img, const std::vector<DetectedNode>& nodes,
                                const ExtractionThresholds& th = {}) {
  th.validate();
  PlaneGraph g;
  for (const auto& n : nodes) g.add_vertex(n.position, n.terminal.has_value());
  const std::size_t n = nodes.size();

  std::vector<std::pair<std::size_t, std::size_t>> retained;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point a = nodes[i].position, b = nodes[j].position;
      if (distance(a, b) < th.close_vertex_dist || detail::supported(img, a, b, th)) retained.emplace_back(i, j);
    }
  }

  // Nearly collinear edges at a shared node: only the shortest survives.
  std::vector<bool> dropped(retained.size(), false);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> incident;
    for (std::size_t e = 0; e < retained.size(); ++e) {
      if (retained[e].first == v || retained[e].second == v) incident.push_back(e);
    }
    for (std::size_t x = 0; x < incident.size(); ++x) {
      for (std::size_t y = x + 1; y < incident.size(); ++y) {
        const auto [a1, b1] = retained[incident[x]];
        const auto [a2, b2] = retained[incident[y]];
        const Point o = nodes[v].position;
        const Point u = nodes[a1 == v ? b1 : a1].position - o;
        const Point w = nodes[a2 == v ? b2 : a2].position - o;
        if (angle_between(u, w) >= th.collinear_angle) continue;
        dropped[norm(u) <= norm(w) ? incident[y] : incident[x]] = true;
      }
    }
  }

  // In a thin triangle of retained edges the long side is a shortcut that
  // reads as white only through the dilation; it goes when it is less exactly
  // drawn than both other sides.
  std::vector<std::vector<double>> exact(n, std::vector<double>(n, -1.0));  // negative: not retained
  for (const auto& [a, b] : retained) {
    exact[a][b] = exact[b][a] =
        detail::line_support(img, nodes[a].position, nodes[b].position, th, false).value_or(1.0);
  }
  const double thin = 2.0 * th.endpoint_exclusion;
  for (std::size_t e = 0; e < retained.size(); ++e) {
    const auto [a, b] = retained[e];
    const Segment ab{nodes[a].position, nodes[b].position};
    for (std::size_t c = 0; c < n && !dropped[e]; ++c) {
      if (c == a || c == b || exact[a][c] < 0.0 || exact[c][b] < 0.0) continue;
      dropped[e] = exact[a][b] < std::min(exact[a][c], exact[c][b]) &&
                   point_segment_distance(nodes[c].position, ab) <= thin;
    }
  }

  // A weakly drawn edge whose white samples all lie on other retained edges
  // is a shortcut through their strokes.
  for (std::size_t e = 0; e < retained.size(); ++e) {
    const auto [a, b] = retained[e];
    const double len = distance(nodes[a].position, nodes[b].position);
    if (dropped[e] || exact[a][b] > th.edge_fraction || len < th.close_vertex_dist) continue;
    bool covered = true;
    bresenham(to_pixel(nodes[a].position), to_pixel(nodes[b].position), [&](int x, int y) {
      if (!covered || img.at(x, y) < th.binarize_white) return;
      const Point c = pixel_center(x, y);
      bool on_other = false;
      for (std::size_t o = 0; o < retained.size() && !on_other; ++o) {
        if (o == e || dropped[o]) continue;
        const Segment s{nodes[retained[o].first].position, nodes[retained[o].second].position};
        on_other = point_segment_distance(c, s) <= detail::kStrokeReach;
      }
      covered = on_other;
    });
    dropped[e] = covered;
  }
  for (std::size_t e = 0; e < retained.size(); ++e) {
    if (!dropped[e]) g.add_edge(retained[e].first, retained[e].second);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Polygons.

struct ExtractedPolygon {
  std::vector<std::size_t> order;  // indices into the input points
  SimplePolygon polygon;           // same coordinates as the input points
};

namespace detail {

// Simple Hamiltonian cycle over candidate edges with the largest total edge
// weight. Weights are at most 1, which bounds what an incomplete path can
// still gain.
class HamiltonSearch {
 public:
  using Weights = std::vector<std::vector<double>>;  // negative: no candidate

  HamiltonSearch(const std::vector<Point>& pts, const Weights& w) : pts_(pts), w_(w), visited_(pts.size(), false) {
    const std::size_t n = pts.size();
    adj_.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        if (u != v && w[u][v] >= 0.0) adj_[u].push_back(v);
      }
      std::stable_sort(adj_[u].begin(), adj_[u].end(), [&](std::size_t a, std::size_t b) { return w[u][a] > w[u][b]; });
    }
  }

  std::optional<std::vector<std::size_t>> run() {
    path_.assign(1, 0);
    visited_[0] = true;
    extend(0.0);
    if (best_.empty()) return std::nullopt;
    return best_;
  }

 private:
  void extend(double score) {
    const std::size_t n = pts_.size();
    const std::size_t last = path_.back();
    if (score + static_cast<double>(n + 1 - path_.size()) <= best_score_) return;
    if (path_.size() == n) {
      if (w_[last][0] < 0.0) return;
      std::vector<Point> poly;
      for (std::size_t i : path_) poly.push_back(pts_[i]);
      if (!is_simple_polygon(poly)) return;
      best_score_ = score + w_[last][0];
      best_ = path_;
      return;
    }
    for (std::size_t next : adj_[last]) {
      if (visited_[next]) continue;
      if (crosses_path(last, next)) continue;
      visited_[next] = true;
      path_.push_back(next);
      if (feasible()) extend(score + w_[last][next]);
      path_.pop_back();
      visited_[next] = false;
    }
  }

  // New edge properly crossing an existing path edge can never close into a
  // simple polygon.
  bool crosses_path(std::size_t a, std::size_t b) const {
    const Segment s{pts_[a], pts_[b]};
    for (std::size_t i = 0; i + 2 < path_.size(); ++i) {
      const Segment t{pts_[path_[i]], pts_[path_[i + 1]]};
      const auto kind = segment_intersect(s, t);
      if (kind == IntersectionKind::Proper || kind == IntersectionKind::CollinearOverlap) return true;
    }
    return false;
  }

  // Every unvisited vertex needs two usable neighbours (unvisited, the path
  // head, or the start vertex).
  bool feasible() const {
    const std::size_t head = path_.back();
    for (std::size_t v = 0; v < pts_.size(); ++v) {
      if (visited_[v]) continue;
      int usable = 0;
      for (std::size_t u : adj_[v]) usable += (!visited_[u] || u == head || u == 0);
      if (usable < 2) return false;
    }
    return true;
  }

  const std::vector<Point>& pts_;
  const Weights& w_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<bool> visited_;
  std::vector<std::size_t> path_;
  std::vector<std::size_t> best_;
  double best_score_ = -1.0;
};

}  // namespace detail

inline ExtractedPolygon extract_polygon(const GrayImage& img, const std::vector<Point>& points,
                                        const ExtractionThresholds& th = {}) {
  th.validate();
  const std::size_t n = points.size();
  if (n < 3) throw InvalidInput("polygon extraction needs at least 3 points");

  struct Candidate {
    std::size_t a, b;
    double exact;  // undilated support
  };
  std::vector<Candidate> cand;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Points too close to leave any sample are always candidates.
      const auto f = detail::line_support(img, points[i], points[j], th);
      if (f && *f <= th.edge_fraction) continue;
      cand.push_back({i, j, detail::line_support(img, points[i], points[j], th, false).value_or(1.0)});
    }
  }

  // A chord inside a thin sliver of the polygon reads as white once dilated
  // and then crosses true edges. Of two crossing candidates the one that is
  // less exactly drawn is discarded, both when neither is drawn. Two drawn
  // lines that cross mean the image is not a single simple polygon, unless
  // they cross right on a third candidate: then both sit inside a sliver
  // whose sides merged into solid white, and the cycle search picks. Nearly
  // parallel pairs pass.
  auto crossing_on_other = [&](std::size_t x, std::size_t y) {
    const Segment s{points[cand[x].a], points[cand[x].b]}, t{points[cand[y].a], points[cand[y].b]};
    const Point d1 = s.b - s.a, d2 = t.b - t.a;
    const Point p = s.a + (cross(t.a - s.a, d2) / cross(d1, d2)) * d1;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      if (k == x || k == y) continue;
      if (point_segment_distance(p, {points[cand[k].a], points[cand[k].b]}) <= detail::kStrokeReach) return true;
    }
    return false;
  };
  std::vector<bool> gone(cand.size(), false);
  for (std::size_t x = 0; x < cand.size(); ++x) {
    for (std::size_t y = x + 1; y < cand.size(); ++y) {
      const Candidate &c1 = cand[x], &c2 = cand[y];
      if (c1.a == c2.a || c1.a == c2.b || c1.b == c2.a || c1.b == c2.b) continue;
      const Segment s{points[c1.a], points[c1.b]}, t{points[c2.a], points[c2.b]};
      if (segment_intersect(s, t) != IntersectionKind::Proper) continue;
      const double gap = angle_between(s.b - s.a, t.b - t.a);
      if (std::min(gap, kPi - gap) < th.collinear_angle) continue;
      if (c1.exact != c2.exact) {
        gone[c1.exact < c2.exact ? x : y] = true;
      } else if (c1.exact > th.edge_fraction) {
        if (!crossing_on_other(x, y)) throw ExtractionFailure("candidate edges cross");
      } else {
        gone[x] = gone[y] = true;
      }
    }
  }

  detail::HamiltonSearch::Weights w(n, std::vector<double>(n, -1.0));
  std::vector<int> degree(n, 0);
  for (std::size_t k = 0; k < cand.size(); ++k) {
    if (gone[k]) continue;
    const auto& c = cand[k];
    w[c.a][c.b] = w[c.b][c.a] = c.exact;
    ++degree[c.a];
    ++degree[c.b];
  }
  if (std::any_of(degree.begin(), degree.end(), [](int d) { return d < 2; })) {
    throw ExtractionFailure("point with fewer than two candidate edges");
  }

  detail::HamiltonSearch search(points, w);
  const auto cycle = search.run();
  if (!cycle) throw ExtractionFailure("no simple cycle through all points");
  ExtractedPolygon out;
  out.order = *cycle;
  for (std::size_t i : out.order) out.polygon.vertices.push_back(points[i]);
  return out;
}

}  // namespace geopix
