#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "maxap.hpp"
#include "rng.hpp"
#include "steiner.hpp"

namespace geopix {

enum class Task { Square, Steiner, Maxap };

inline std::string to_string(Task t) {
  switch (t) {
    case Task::Square: return "square";
    case Task::Steiner: return "steiner";
    case Task::Maxap: return "maxap";
  }
  return "unknown";
}

inline Task parse_task(std::string_view s) {
  if (s == "square") return Task::Square;
  if (s == "steiner") return Task::Steiner;
  if (s == "maxap") return Task::Maxap;
  throw InvalidInput("unknown task: " + std::string(s));
}

enum class SteinerMode { Exact, Heuristic, Mst, Random };

inline SteinerMode parse_steiner_mode(std::string_view s) {
  if (s == "exact") return SteinerMode::Exact;
  if (s == "heuristic") return SteinerMode::Heuristic;
  if (s == "mst") return SteinerMode::Mst;
  if (s == "random") return SteinerMode::Random;
  throw InvalidInput("unknown mode: " + std::string(s));
}

inline std::string to_string(SteinerMode m) {
  switch (m) {
    case SteinerMode::Exact: return "exact";
    case SteinerMode::Heuristic: return "heuristic";
    case SteinerMode::Mst: return "mst";
    case SteinerMode::Random: return "random";
  }
  return "unknown";
}

// World units for point tasks: the unit square spans the 128 px canvas.
inline constexpr double kPointMargin = 4.0 / 128.0;
inline constexpr double kSteinerSeparation = 4.0 / 128.0;
inline constexpr double kPolygonSeparation = 6.0 / 128.0;
inline constexpr double kCollinearTolerance = 1e-4;

struct PointSampling {
  double margin = kPointMargin;
  double min_separation = kSteinerSeparation;
  double collinear_tolerance = 0.0;  // 0 disables the triple check
  int retry_budget = 200;
};

namespace detail {

// Smallest height of the triangle abc, i.e. how far it is from collinear.
inline double triangle_height(Point a, Point b, Point c) {
  const double longest = std::max({distance(a, b), distance(b, c), distance(c, a)});
  return longest == 0.0 ? 0.0 : std::abs(orient2d(a, b, c)) / longest;
}

inline bool points_acceptable(std::span<const Point> ps, const PointSampling& s) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) {
      if (distance(ps[i], ps[j]) < s.min_separation) return false;
      if (s.collinear_tolerance <= 0.0) continue;
      for (std::size_t k = j + 1; k < ps.size(); ++k) {
        if (triangle_height(ps[i], ps[j], ps[k]) <= s.collinear_tolerance) return false;
      }
    }
  }
  return true;
}

}  // namespace detail

// Rejection sampling of the whole point set, uniformly inside the margin.
inline std::vector<Point> sample_points(Rng& rng, std::size_t n, const PointSampling& s, std::uint64_t seed) {
  for (int attempt = 0; attempt < s.retry_budget; ++attempt) {
    std::vector<Point> ps(n);
    for (auto& p : ps) p = {rng.uniform(s.margin, 1.0 - s.margin), rng.uniform(s.margin, 1.0 - s.margin)};
    if (detail::points_acceptable(ps, s)) return ps;
  }
  throw GenerationFailure("point sampling exhausted its retry budget", seed);
}

// Solution geometry must stay legible once drawn: distinct vertices far
// enough apart that their disks never touch, and no vertex hugging an edge it
// does not belong to.
struct RenderClearance {
  double vertex_gap = 8.0 / 128.0;
  double edge_gap = 4.0 / 128.0;
};

inline bool has_render_clearance(const PlaneGraph& g, const RenderClearance& c) {
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < g.vertices.size(); ++j) {
      if (distance(g.vertices[i], g.vertices[j]) < c.vertex_gap) return false;
    }
  }
  for (const auto& e : g.edges) {
    const Segment s = g.segment(e);
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
      if (v == e.first || v == e.second) continue;
      if (point_segment_distance(g.vertices[v], s) < c.edge_gap) return false;
    }
  }
  return true;
}

struct SteinerGenConfig {
  std::size_t min_points = 4;
  std::size_t max_points = 8;
  PointSampling sampling{};
  RenderClearance clearance{};
  int retry_budget = 200;
};

struct SteinerInstance {
  std::vector<Point> terminals;
  SteinerSolution solution;
};

inline SteinerSolution solve_steiner(std::span<const Point> ps, SteinerMode mode, std::uint64_t seed = 0) {
  switch (mode) {
    case SteinerMode::Exact: return solve_exact(ps);
    case SteinerMode::Heuristic: return solve_heuristic(ps);
    case SteinerMode::Mst: {
      SteinerSolution s{minimum_spanning_tree(ps), 0.0, false};
      s.total_length = s.graph.total_length();
      return s;
    }
    case SteinerMode::Random: {
      SteinerSolution s{random_planar_tree(ps, seed), 0.0, false};
      s.total_length = s.graph.total_length();
      return s;
    }
  }
  throw InvalidInput("unknown Steiner mode");
}

// Exact solutions up to the exact-solver limit, heuristic beyond it.
inline SteinerSolution reference_steiner(std::span<const Point> ps) {
  return ps.size() <= kExactSteinerLimit ? solve_exact(ps) : solve_heuristic(ps);
}

inline SteinerInstance generate_steiner_instance(std::uint64_t seed, const SteinerGenConfig& cfg = {}) {
  if (cfg.min_points < 2 || cfg.max_points < cfg.min_points) throw InvalidInput("invalid Steiner point range");
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(cfg.min_points),
                                                          static_cast<std::int64_t>(cfg.max_points)));
  for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
    SteinerInstance inst;
    inst.terminals = sample_points(rng, n, cfg.sampling, seed);
    // Terminals are vertices too; checking them first avoids hopeless solves.
    PointSampling gap = cfg.sampling;
    gap.min_separation = cfg.clearance.vertex_gap;
    gap.collinear_tolerance = 0.0;
    if (!detail::points_acceptable(inst.terminals, gap)) continue;
    inst.solution = reference_steiner(inst.terminals);
    if (has_render_clearance(inst.solution.graph, cfg.clearance)) return inst;
  }
  throw GenerationFailure("Steiner instance generation exhausted its retry budget", seed);
}

struct MaxapGenConfig {
  std::size_t min_points = 7;
  std::size_t max_points = 12;
  PointSampling sampling{kPointMargin, kPolygonSeparation, kCollinearTolerance, 200};
};

struct MaxapInstance {
  std::vector<Point> points;
  PolygonizationResult solution;
};

inline MaxapInstance generate_maxap_instance(std::uint64_t seed, const MaxapGenConfig& cfg = {}) {
  if (cfg.min_points < 3 || cfg.max_points < cfg.min_points) throw InvalidInput("invalid polygon point range");
  if (cfg.max_points > kExactPolygonLimit) {
    throw SizeLimitError("exact polygon search supports at most 15 points");
  }
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(cfg.min_points),
                                                          static_cast<std::int64_t>(cfg.max_points)));
  MaxapInstance inst;
  inst.points = sample_points(rng, n, cfg.sampling, seed);
  inst.solution = solve_exact_dfs(inst.points);
  return inst;
}

}  // namespace geopix
