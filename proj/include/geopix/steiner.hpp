#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace geopix {

inline constexpr std::size_t kExactSteinerLimit = 8;
inline constexpr double kCollapseThreshold = 1e-7;
inline constexpr double kSteinerAngle = 2.0 * kPi / 3.0;

// Slots [0, terminal_count) are terminals, the rest Steiner points.
struct SteinerTopology {
  std::size_t terminal_count = 0;
  std::size_t steiner_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t slot_count() const { return terminal_count + steiner_count; }

  void validate() const {
    const std::size_t n = slot_count();
    if (terminal_count < 2 && n > 1) throw InvalidInput("topology needs at least 2 terminals");
    if (steiner_count + 2 > terminal_count) throw InvalidInput("too many Steiner slots");
    if (edges.size() + 1 != n) throw InvalidInput("topology is not a tree");
    std::vector<std::size_t> deg(n, 0);
    DisjointSets sets(n);
    for (const auto& [a, b] : edges) {
      if (a >= n || b >= n || a == b || !sets.unite(a, b)) throw InvalidInput("topology is not a tree");
      ++deg[a];
      ++deg[b];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= terminal_count && deg[i] != 3) throw InvalidInput("Steiner slot without degree 3");
      if (i < terminal_count && deg[i] == 0) throw InvalidInput("isolated terminal");
    }
  }
};

struct SteinerSolution {
  PlaneGraph graph;
  double total_length = 0.0;
  bool exact = false;
};

// Point minimizing the summed distance to a, b and c.
inline Point fermat_point(Point a, Point b, Point c) {
  const std::array<Point, 3> p{a, b, c};
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      if (p[i] == p[j]) return p[i];
    }
  }
  std::array<double, 3> ang{}, w{};
  for (int i = 0; i < 3; ++i) {
    ang[i] = angle_between(p[(i + 1) % 3] - p[i], p[(i + 2) % 3] - p[i]);
    if (ang[i] >= kSteinerAngle) return p[i];
  }
  for (int i = 0; i < 3; ++i) {
    w[i] = distance(p[(i + 1) % 3], p[(i + 2) % 3]) / std::sin(ang[i] + kPi / 3.0);
  }
  const double s = w[0] + w[1] + w[2];
  return (w[0] * a + w[1] * b + w[2] * c) / s;
}

struct OptimizeOptions {
  double tolerance = 1e-9;
  int max_iterations = 10000;
};

struct TopologyOptimum {
  std::vector<Point> positions;  // all slots, terminals first
  double length = 0.0;
  bool converged = true;
  int iterations = 0;
};

// Gauss-Seidel sweeps replacing each Steiner point by the Fermat point of its
// three neighbours. Without a warm start, Steiner points begin at the
// harmonic (neighbour-average) layout.
inline TopologyOptimum optimize_topology(const SteinerTopology& topo, std::span<const Point> terminals,
                                         const OptimizeOptions& opt = {}, std::span<const Point> initial = {}) {
  if (terminals.size() != topo.terminal_count) throw InvalidInput("terminal count does not match topology");
  const std::size_t n = topo.terminal_count, total = topo.slot_count();
  std::vector<std::array<std::size_t, 3>> nbr(topo.steiner_count);
  std::vector<int> fill(topo.steiner_count, 0);
  for (const auto& [a, b] : topo.edges) {
    if (a >= n) nbr[a - n][fill[a - n]++] = b;
    if (b >= n) nbr[b - n][fill[b - n]++] = a;
  }

  TopologyOptimum out;
  out.positions.assign(terminals.begin(), terminals.end());
  if (initial.size() == total) {
    out.positions.assign(initial.begin(), initial.end());
    std::copy(terminals.begin(), terminals.end(), out.positions.begin());
  } else {
    out.positions.resize(total, centroid(terminals));
    for (int sweep = 0; sweep < 8; ++sweep) {
      for (std::size_t s = 0; s < topo.steiner_count; ++s) {
        const auto& q = nbr[s];
        out.positions[n + s] = (out.positions[q[0]] + out.positions[q[1]] + out.positions[q[2]]) / 3.0;
      }
    }
  }

  out.converged = topo.steiner_count == 0;
  for (int it = 0; it < opt.max_iterations && !out.converged; ++it) {
    double moved = 0.0;
    for (std::size_t s = 0; s < topo.steiner_count; ++s) {
      const auto& q = nbr[s];
      const Point next = fermat_point(out.positions[q[0]], out.positions[q[1]], out.positions[q[2]]);
      moved = std::max(moved, distance(next, out.positions[n + s]));
      out.positions[n + s] = next;
    }
    out.iterations = it + 1;
    out.converged = moved < opt.tolerance;
  }
  for (const auto& [a, b] : topo.edges) out.length += distance(out.positions[a], out.positions[b]);
  return out;
}

namespace detail {

// All full topologies (every terminal a leaf, k = m - 2) over m leaves,
// built by subdividing each edge in turn with the next leaf.
inline std::vector<SteinerTopology> make_full_topologies(std::size_t m) {
  if (m == 2) return {SteinerTopology{2, 0, {{0, 1}}}};
  std::vector<SteinerTopology> current{SteinerTopology{3, 1, {{0, 3}, {1, 3}, {2, 3}}}};
  for (std::size_t leaf = 3; leaf < m; ++leaf) {
    std::vector<SteinerTopology> next;
    for (const auto& t : current) {
      for (std::size_t e = 0; e < t.edges.size(); ++e) {
        // Leaf slots shift up by one; Steiner slots keep their relative order.
        auto remap = [&](std::size_t v) { return v < leaf ? v : v + 1; };
        SteinerTopology u{leaf + 1, t.steiner_count + 1, {}};
        const std::size_t s = u.slot_count() - 1;
        for (std::size_t f = 0; f < t.edges.size(); ++f) {
          const auto [a, b] = t.edges[f];
          if (f == e) {
            u.edges.emplace_back(remap(a), s);
            u.edges.emplace_back(remap(b), s);
          } else {
            u.edges.emplace_back(remap(a), remap(b));
          }
        }
        u.edges.emplace_back(leaf, s);
        next.push_back(std::move(u));
      }
    }
    current = std::move(next);
  }
  return current;
}

inline const std::vector<SteinerTopology>& full_topologies(std::size_t m) {
  static const auto table = [] {
    std::array<std::vector<SteinerTopology>, kExactSteinerLimit + 1> t;
    for (std::size_t k = 2; k <= kExactSteinerLimit; ++k) t[k] = make_full_topologies(k);
    return t;
  }();
  if (m < 2 || m > kExactSteinerLimit) throw InvalidInput("full topology size out of range");
  return table[m];
}

inline void check_distinct(std::span<const Point> ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      if (ps[i] == ps[j]) throw InvalidInput("duplicate terminal");
    }
  }
}

// Smallest angle between angularly adjacent edges at vertex v, along with
// the two neighbours forming it.
struct Wedge {
  double angle = kTwoPi;
  std::size_t u = 0, w = 0;
};

inline Wedge tightest_wedge(const PlaneGraph& g, const std::vector<std::size_t>& nbrs, std::size_t v) {
  Wedge best;
  if (nbrs.size() < 2) return best;
  std::vector<std::pair<double, std::size_t>> dirs;
  for (std::size_t u : nbrs) {
    const Point d = g.vertices[u] - g.vertices[v];
    dirs.emplace_back(std::atan2(d.y, d.x), u);
  }
  std::sort(dirs.begin(), dirs.end());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const auto& a = dirs[i];
    const auto& b = dirs[(i + 1) % dirs.size()];
    double gap = b.first - a.first;
    if (gap <= 0) gap += kTwoPi;
    if (dirs.size() == 2) gap = std::min(gap, kTwoPi - gap);
    if (gap < best.angle) best = {gap, std::min(a.second, b.second), std::max(a.second, b.second)};
  }
  return best;
}

// FST optimum for a terminal subset, if the best full topology stays
// non-degenerate: no collapsed edge and all Steiner angles at 120 degrees.
struct FullComponent {
  bool ok = false;
  double length = std::numeric_limits<double>::infinity();
  std::vector<Point> positions;
  const SteinerTopology* topology = nullptr;
};

inline bool nondegenerate(const SteinerTopology& topo, const TopologyOptimum& opt, double angle_tol) {
  for (const auto& [a, b] : topo.edges) {
    if (distance(opt.positions[a], opt.positions[b]) <= kCollapseThreshold) return false;
  }
  std::vector<std::vector<std::size_t>> adj(topo.slot_count());
  for (const auto& [a, b] : topo.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (std::size_t s = topo.terminal_count; s < topo.slot_count(); ++s) {
    for (int i = 0; i < 3; ++i) {
      const Point u = opt.positions[adj[s][i]] - opt.positions[s];
      const Point w = opt.positions[adj[s][(i + 1) % 3]] - opt.positions[s];
      if (std::abs(angle_between(u, w) - kSteinerAngle) > angle_tol) return false;
    }
  }
  return true;
}

inline FullComponent best_full_component(std::span<const Point> pts, double bound) {
  FullComponent best;
  for (const auto& topo : full_topologies(pts.size())) {
    const auto opt = optimize_topology(topo, pts);
    if (opt.length >= best.length || opt.length >= bound) continue;
    if (!nondegenerate(topo, opt, 1e-4)) continue;
    best = {true, opt.length, opt.positions, &topo};
  }
  return best;
}

}  // namespace detail

// Exact Steiner minimal tree for up to 8 terminals. Every SMT is a union of
// full components glued at terminals, so the optimum over a terminal set is
// either one full component or two optimal trees sharing one terminal.
inline SteinerSolution solve_exact(std::span<const Point> ps) {
  const std::size_t n = ps.size();
  if (n < 2) throw InvalidInput("Steiner tree needs at least 2 terminals");
  if (n > kExactSteinerLimit) {
    throw SizeLimitError("exact Steiner solver supports at most 8 terminals; use solve_heuristic");
  }
  detail::check_distinct(ps);

  const std::uint32_t full = (1u << n) - 1;
  struct Entry {
    double length = std::numeric_limits<double>::infinity();
    std::uint32_t left = 0, right = 0;  // split parts when not a full component
    detail::FullComponent component;
  };
  std::vector<Entry> best(full + 1);
  std::vector<std::uint32_t> order;
  for (std::uint32_t m = 1; m <= full; ++m) {
    if (std::popcount(m) >= 2) order.push_back(m);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });

  for (std::uint32_t mask : order) {
    Entry& e = best[mask];
    for (std::size_t t = 0; t < n; ++t) {
      if (!(mask >> t & 1u)) continue;
      const std::uint32_t rest = mask & ~(1u << t);
      if (std::popcount(rest) < 2) continue;
      const std::uint32_t low = rest & (~rest + 1);
      for (std::uint32_t sub = (rest - 1) & rest; sub; sub = (sub - 1) & rest) {
        if (!(sub & low)) continue;
        const std::uint32_t a = sub | (1u << t), b = (rest & ~sub) | (1u << t);
        const double len = best[a].length + best[b].length;
        if (len < e.length) {
          e.length = len;
          e.left = a;
          e.right = b;
        }
      }
    }
    std::vector<Point> pts;
    for (std::size_t t = 0; t < n; ++t) {
      if (mask >> t & 1u) pts.push_back(ps[t]);
    }
    auto comp = detail::best_full_component(pts, e.length);
    if (comp.ok && comp.length < e.length) {
      e.length = comp.length;
      e.left = e.right = 0;
      e.component = std::move(comp);
    }
  }

  SteinerSolution sol;
  sol.exact = true;
  for (const Point& p : ps) sol.graph.add_vertex(p, true);
  std::vector<std::uint32_t> stack{full};
  while (!stack.empty()) {
    const std::uint32_t mask = stack.back();
    stack.pop_back();
    const Entry& e = best[mask];
    if (e.left) {
      stack.push_back(e.left);
      stack.push_back(e.right);
      continue;
    }
    std::vector<std::size_t> slot;
    for (std::size_t t = 0; t < n; ++t) {
      if (mask >> t & 1u) slot.push_back(t);
    }
    const auto& topo = *e.component.topology;
    for (std::size_t s = 0; s < topo.steiner_count; ++s) {
      slot.push_back(sol.graph.add_vertex(e.component.positions[topo.terminal_count + s], false));
    }
    for (const auto& [a, b] : topo.edges) sol.graph.add_edge(slot[a], slot[b]);
  }
  sol.total_length = sol.graph.total_length();
  return sol;
}

namespace detail {

inline SteinerTopology topology_of(const PlaneGraph& g, std::vector<std::size_t>& slot_to_vertex) {
  const std::size_t n = g.vertices.size();
  std::vector<std::size_t> slot(n);
  slot_to_vertex.clear();
  SteinerTopology topo;
  for (std::size_t v = 0; v < n; ++v) {
    if (g.terminal[v]) {
      slot[v] = slot_to_vertex.size();
      slot_to_vertex.push_back(v);
    }
  }
  topo.terminal_count = slot_to_vertex.size();
  for (std::size_t v = 0; v < n; ++v) {
    if (!g.terminal[v]) {
      slot[v] = slot_to_vertex.size();
      slot_to_vertex.push_back(v);
    }
  }
  topo.steiner_count = n - topo.terminal_count;
  for (const auto& [a, b] : g.edges) topo.edges.emplace_back(slot[a], slot[b]);
  return topo;
}

}  // namespace detail

// Greedy improvement of the MST: the tightest wedge (< 120 degrees) at a
// terminal is split by a new Steiner point, after which all Steiner points
// are re-optimized. Only strictly improving, non-degenerate moves are kept.
inline SteinerSolution solve_heuristic(std::span<const Point> ps) {
  const std::size_t n = ps.size();
  if (n < 2) throw InvalidInput("Steiner tree needs at least 2 terminals");
  detail::check_distinct(ps);

  SteinerSolution sol;
  sol.graph = minimum_spanning_tree(ps);
  sol.total_length = sol.graph.total_length();

  struct Candidate {
    double angle;
    std::size_t v, u, w;
  };
  for (std::size_t inserted = 0; inserted < 3 * n; ++inserted) {
    const auto adj = sol.graph.adjacency();
    std::vector<Candidate> cands;
    for (std::size_t v = 0; v < sol.graph.vertices.size(); ++v) {
      if (!sol.graph.terminal[v]) continue;
      const auto wedge = detail::tightest_wedge(sol.graph, adj[v], v);
      if (wedge.angle < kSteinerAngle - 1e-9) cands.push_back({wedge.angle, v, wedge.u, wedge.w});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.angle != b.angle ? a.angle < b.angle : a.v < b.v;
    });

    bool improved = false;
    for (const auto& c : cands) {
      PlaneGraph trial;
      for (std::size_t v = 0; v < sol.graph.vertices.size(); ++v) {
        trial.add_vertex(sol.graph.vertices[v], sol.graph.terminal[v]);
      }
      for (const auto& e : sol.graph.edges) {
        const bool cut = e == PlaneGraph::Edge{std::min(c.v, c.u), std::max(c.v, c.u)} ||
                         e == PlaneGraph::Edge{std::min(c.v, c.w), std::max(c.v, c.w)};
        if (!cut) trial.edges.push_back(e);
      }
      const std::size_t s = trial.add_vertex(
          fermat_point(sol.graph.vertices[c.v], sol.graph.vertices[c.u], sol.graph.vertices[c.w]), false);
      trial.add_edge(s, c.v);
      trial.add_edge(s, c.u);
      trial.add_edge(s, c.w);

      std::vector<std::size_t> slot_to_vertex;
      const auto topo = detail::topology_of(trial, slot_to_vertex);
      std::vector<Point> terms, init;
      for (std::size_t i = 0; i < topo.slot_count(); ++i) {
        init.push_back(trial.vertices[slot_to_vertex[i]]);
        if (i < topo.terminal_count) terms.push_back(init.back());
      }
      const auto opt = optimize_topology(topo, terms, {}, init);
      bool collapsed = false;
      for (const auto& [a, b] : topo.edges) {
        collapsed = collapsed || distance(opt.positions[a], opt.positions[b]) <= kCollapseThreshold;
      }
      if (collapsed || opt.length >= sol.total_length - 1e-12) continue;
      for (std::size_t i = 0; i < topo.slot_count(); ++i) trial.vertices[slot_to_vertex[i]] = opt.positions[i];
      sol.graph = std::move(trial);
      sol.total_length = sol.graph.total_length();
      improved = true;
      break;
    }
    if (!improved) break;
  }
  return sol;
}

struct SmtReport {
  bool tree = false;
  bool planar = false;
  bool steiner_degree_3 = false;
  bool angles = false;
  bool steiner_count = false;
  bool steiner_in_hull = false;

  bool all() const { return tree && planar && steiner_degree_3 && angles && steiner_count && steiner_in_hull; }
};

inline SmtReport validate_smt_structure(const SteinerSolution& sol, std::span<const Point> ps,
                                        double angle_tol = 1e-3) {
  const PlaneGraph& g = sol.graph;
  SmtReport r;
  r.tree = is_tree(g) && g.terminal_count() == ps.size();

  r.planar = true;
  for (std::size_t i = 0; i < g.edges.size() && r.planar; ++i) {
    for (std::size_t j = i + 1; j < g.edges.size(); ++j) {
      const auto kind = segment_intersect(g.segment(g.edges[i]), g.segment(g.edges[j]));
      if (kind == IntersectionKind::Proper || kind == IntersectionKind::CollinearOverlap) {
        r.planar = false;
        break;
      }
    }
  }

  const auto adj = g.adjacency();
  r.steiner_degree_3 = true;
  r.angles = true;
  std::size_t steiner = 0;
  for (std::size_t v = 0; v < g.vertices.size(); ++v) {
    if (!g.terminal[v]) {
      ++steiner;
      r.steiner_degree_3 = r.steiner_degree_3 && adj[v].size() == 3;
    }
    if (adj[v].size() > 1 && detail::tightest_wedge(g, adj[v], v).angle < kSteinerAngle - angle_tol) {
      r.angles = false;
    }
  }
  r.steiner_count = steiner + 2 <= std::max<std::size_t>(ps.size(), 2);

  r.steiner_in_hull = true;
  if (steiner > 0) {
    std::vector<Point> hull;
    try {
      hull = convex_hull(ps).vertices;
    } catch (const DegenerateGeometry&) {
      r.steiner_in_hull = false;
    }
    for (std::size_t v = 0; v < g.vertices.size() && !hull.empty(); ++v) {
      if (!g.terminal[v] && !point_in_polygon(g.vertices[v], hull, kCollapseThreshold)) r.steiner_in_hull = false;
    }
  }
  return r;
}

inline constexpr std::size_t kRandomTreeChoices = 2;

// Random insertion order; each point joins one of the two nearest inserted
// points it can see without touching an existing edge, chosen uniformly.
inline PlaneGraph random_planar_tree(std::span<const Point> ps, std::uint64_t seed) {
  const std::size_t n = ps.size();
  if (n < 2) throw InvalidInput("tree needs at least 2 points");
  detail::check_distinct(ps);
  Rng rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));

  PlaneGraph g;
  for (const Point& p : ps) g.add_vertex(p, true);
  std::vector<std::size_t> inserted{order[0]};
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t p = order[k];
    auto by_distance = inserted;
    std::sort(by_distance.begin(), by_distance.end(), [&](std::size_t a, std::size_t b) {
      const double da = distance(ps[p], ps[a]), db = distance(ps[p], ps[b]);
      return da != db ? da < db : a < b;
    });
    std::vector<std::size_t> visible;
    for (std::size_t q : by_distance) {
      const Segment s{ps[p], ps[q]};
      bool blocked = false;
      for (const auto& e : g.edges) {
        const auto kind = segment_intersect(s, g.segment(e));
        const bool shares = e.first == q || e.second == q;
        if (kind != IntersectionKind::None && !(shares && kind == IntersectionKind::EndpointTouch)) {
          blocked = true;
          break;
        }
      }
      if (!blocked) visible.push_back(q);
      if (visible.size() == kRandomTreeChoices) break;
    }
    if (visible.empty()) throw DegenerateGeometry("no visible point while building a planar tree");
    const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(visible.size()) - 1);
    g.add_edge(p, visible[static_cast<std::size_t>(pick)]);
    inserted.push_back(p);
  }
  return g;
}

}  // namespace geopix
