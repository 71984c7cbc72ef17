#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvegen.hpp"
#include "dataset.hpp"
#include "extract.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "raster.hpp"
#include "tasks.hpp"

namespace geopix {

// ---------------------------------------------------------------------------
// Geometry records stored in manifests (world coordinates).

inline nlohmann::json points_json(std::span<const Point> ps) {
  auto out = nlohmann::json::array();
  for (const Point& p : ps) out.push_back({p.x, p.y});
  return out;
}

inline std::vector<Point> points_from_json(const nlohmann::json& j) {
  std::vector<Point> out;
  for (const auto& p : j) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

struct SquareGeometry {
  std::vector<Point> curve;  // closed polyline
  std::vector<InscribedSquare> squares;
  std::size_t square_index = 0;
  bool circle = false;
  int resolution = kDefaultResolution;

  Polyline polyline() const { return make_polyline(curve, true); }
};

struct SteinerGeometry {
  std::vector<Point> terminals;
  SteinerSolution solution;
  int resolution = kDefaultResolution;
};

struct MaxapGeometry {
  std::vector<Point> points;
  PolygonizationResult solution;
  int resolution = kDefaultResolution;
};

inline nlohmann::json to_json(const SquareGeometry& g) {
  auto squares = nlohmann::json::array();
  for (const auto& s : g.squares) {
    squares.push_back({{"center", {s.center.x, s.center.y}}, {"side", s.side}, {"rotation", s.rotation}});
  }
  return {{"resolution", g.resolution}, {"curve", points_json(g.curve)}, {"squares", squares},
          {"square_index", g.square_index}, {"circle", g.circle}};
}

inline nlohmann::json to_json(const SteinerGeometry& g) {
  const auto& graph = g.solution.graph;
  auto edges = nlohmann::json::array();
  for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
  std::vector<bool> terminal(graph.terminal.begin(), graph.terminal.end());
  return {{"resolution", g.resolution},
          {"terminals", points_json(g.terminals)},
          {"solution",
           {{"vertices", points_json(graph.vertices)},
            {"terminal", terminal},
            {"edges", edges},
            {"length", g.solution.total_length},
            {"exact", g.solution.exact}}}};
}

inline nlohmann::json to_json(const MaxapGeometry& g) {
  return {{"resolution", g.resolution},
          {"points", points_json(g.points)},
          {"solution", {{"order", g.solution.order}, {"area", g.solution.area}}}};
}

inline SquareGeometry square_geometry(const InstanceManifest& m) {
  const auto& j = m.geometry;
  SquareGeometry g;
  g.resolution = j.at("resolution").get<int>();
  g.curve = points_from_json(j.at("curve"));
  for (const auto& s : j.at("squares")) {
    g.squares.push_back({{s.at("center").at(0).get<double>(), s.at("center").at(1).get<double>()},
                         s.at("side").get<double>(),
                         s.at("rotation").get<double>()});
  }
  g.square_index = j.at("square_index").get<std::size_t>();
  g.circle = j.at("circle").get<bool>();
  if (g.square_index >= g.squares.size()) throw DatasetError(m.instance_id + ": square_index out of range");
  return g;
}

inline SteinerGeometry steiner_geometry(const InstanceManifest& m) {
  const auto& j = m.geometry;
  SteinerGeometry g;
  g.resolution = j.at("resolution").get<int>();
  g.terminals = points_from_json(j.at("terminals"));
  const auto& s = j.at("solution");
  const auto vs = points_from_json(s.at("vertices"));
  const auto terminal = s.at("terminal").get<std::vector<bool>>();
  if (terminal.size() != vs.size()) throw DatasetError(m.instance_id + ": terminal flags do not match vertices");
  for (std::size_t i = 0; i < vs.size(); ++i) g.solution.graph.add_vertex(vs[i], terminal[i]);
  for (const auto& e : s.at("edges")) g.solution.graph.add_edge(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  g.solution.total_length = s.at("length").get<double>();
  g.solution.exact = s.at("exact").get<bool>();
  return g;
}

inline MaxapGeometry maxap_geometry(const InstanceManifest& m) {
  const auto& j = m.geometry;
  MaxapGeometry g;
  g.resolution = j.at("resolution").get<int>();
  g.points = points_from_json(j.at("points"));
  g.solution.order = j.at("solution").at("order").get<std::vector<std::size_t>>();
  g.solution.area = j.at("solution").at("area").get<double>();
  for (std::size_t i : g.solution.order) {
    if (i >= g.points.size()) throw DatasetError(m.instance_id + ": polygon index out of range");
    g.solution.polygon.vertices.push_back(g.points[i]);
  }
  return g;
}

inline int manifest_resolution(const InstanceManifest& m) { return m.geometry.at("resolution").get<int>(); }

// Re-rasterizes the stored geometry; byte-identical to the stored PNGs.
inline ImagePair rasterize(const InstanceManifest& m) {
  switch (m.task) {
    case Task::Square: {
      const auto g = square_geometry(m);
      CurveInstance inst;
      inst.curve = g.polyline();
      inst.squares = g.squares;
      inst.circle = g.circle;
      return rasterize_square_pair(inst, g.square_index, g.resolution);
    }
    case Task::Steiner: {
      const auto g = steiner_geometry(m);
      return rasterize_steiner_pair(g.terminals, g.solution.graph, g.resolution);
    }
    case Task::Maxap: {
      const auto g = maxap_geometry(m);
      return rasterize_polygon_pair(g.points, g.solution.polygon, g.resolution);
    }
  }
  throw InvalidInput("unknown task");
}

// ---------------------------------------------------------------------------
// Dataset generation.

struct GenRequest {
  Task task = Task::Maxap;
  std::string split = "train";
  std::uint64_t seed = 0;
  std::size_t count = 0;
  // Point count for steiner/maxap; number of inscribed squares per curve for
  // the square task.
  std::size_t min_points = 7;
  std::size_t max_points = 12;
  int resolution = kDefaultResolution;
  int workers = 1;
  RenderClearance clearance{};
  int retry_budget = 200;  // Steiner instances

  void validate() const {
    if (resolution < 16) throw InvalidInput("resolution must be at least 16");
    if (min_points > max_points) throw InvalidInput("empty point range");
    switch (task) {
      case Task::Square:
        if (min_points < 1 || max_points > 5) throw InvalidInput("square task supports 1 to 5 squares per curve");
        break;
      case Task::Steiner:
        if (min_points < 2) throw InvalidInput("Steiner task needs at least 2 points");
        break;
      case Task::Maxap:
        if (min_points < 3 || max_points > kExactPolygonLimit) {
          throw InvalidInput("polygon task supports 3 to 15 points");
        }
        break;
    }
    if (split.empty() || split.find('/') != std::string::npos) throw InvalidInput("invalid split name");
  }
};

// FNV-1a, so that split names map to stable seed streams.
inline std::uint64_t split_stream(const std::string& split) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : split) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t item_seed(const GenRequest& req, std::size_t index) {
  return derive_seed(derive_seed(req.seed, split_stream(req.split)), index);
}

namespace detail {

inline std::string png_name(const std::string& id, const char* kind) { return id + "_" + kind + ".png"; }

inline InstanceManifest base_manifest(const GenRequest& req, std::size_t index, std::uint64_t seed,
                                      const WorldToPixel& map) {
  InstanceManifest m;
  m.task = req.task;
  m.instance_id = instance_id(req.task, req.split, index);
  m.seed = seed;
  m.world_to_pixel = map;
  m.condition_png = png_name(m.instance_id, "cond");
  m.solution_png = png_name(m.instance_id, "sol");
  return m;
}

inline ShardEntry point_task_entry(const GenRequest& req, std::size_t index) {
  const std::uint64_t seed = item_seed(req, index);
  ShardEntry e;
  e.manifest = base_manifest(req, index, seed, point_task_map(req.resolution));
  if (req.task == Task::Steiner) {
    SteinerGenConfig cfg;
    cfg.min_points = req.min_points;
    cfg.max_points = req.max_points;
    cfg.clearance = req.clearance;
    cfg.retry_budget = req.retry_budget;
    auto inst = generate_steiner_instance(seed, cfg);
    SteinerGeometry g{std::move(inst.terminals), std::move(inst.solution), req.resolution};
    e.manifest.geometry = to_json(g);
  } else {
    MaxapGenConfig cfg;
    cfg.min_points = req.min_points;
    cfg.max_points = req.max_points;
    auto inst = generate_maxap_instance(seed, cfg);
    MaxapGeometry g{std::move(inst.points), std::move(inst.solution), req.resolution};
    e.manifest.geometry = to_json(g);
  }
  e.images = rasterize(e.manifest);
  return e;
}

}  // namespace detail

struct GenFailure {
  std::string item;  // instance id, or curve number for the square task
  std::uint64_t seed = 0;
  std::string message;
};

struct GenOutput {
  std::vector<ShardEntry> entries;  // instance order
  std::vector<GenFailure> failures;
};

// Point tasks: one seed per instance index; an index whose generation fails is
// reported and left out. Square task: one seed per curve, one entry per
// inscribed square, and failed curves are skipped until `count` is reached.
inline GenOutput generate(const GenRequest& req) {
  req.validate();
  GenOutput out;
  if (req.task != Task::Square) {
    auto items = parallel_map(req.count, req.workers, [&](std::size_t i) -> std::variant<ShardEntry, GenFailure> {
      try {
        return detail::point_task_entry(req, i);
      } catch (const Error& e) {
        return GenFailure{instance_id(req.task, req.split, i), item_seed(req, i), e.what()};
      }
    });
    for (auto& it : items) {
      if (auto* e = std::get_if<ShardEntry>(&it)) {
        out.entries.push_back(std::move(*e));
      } else {
        out.failures.push_back(std::get<GenFailure>(std::move(it)));
      }
    }
    return out;
  }
  CurveGenConfig cfg;
  cfg.min_squares = static_cast<int>(req.min_points);
  cfg.max_squares = static_cast<int>(req.max_points);
  auto& entries = out.entries;
  std::size_t curve = 0;
  while (entries.size() < req.count) {
    if (out.failures.size() > req.count) throw GenerationFailure("too many curve generation failures", req.seed);
    const std::size_t remaining = req.count - entries.size();
    const std::size_t batch = std::max<std::size_t>(1, remaining / req.min_points);
    const auto curves = parallel_map(batch, req.workers, [&](std::size_t i) -> std::variant<CurveInstance, GenFailure> {
      const std::uint64_t seed = item_seed(req, curve + i);
      try {
        return generate_instance(seed, cfg);
      } catch (const Error& e) {
        return GenFailure{"curve " + std::to_string(curve + i), seed, e.what()};
      }
    });
    for (std::size_t i = 0; i < batch; ++i) {
      if (const auto* f = std::get_if<GenFailure>(&curves[i])) {
        out.failures.push_back(*f);
        continue;
      }
      const auto& inst = std::get<CurveInstance>(curves[i]);
      const std::uint64_t seed = item_seed(req, curve + i);
      SquareGeometry g{inst.curve.points, inst.squares, 0, inst.circle, req.resolution};
      for (std::size_t s = 0; s < inst.squares.size() && entries.size() < req.count; ++s) {
        g.square_index = s;
        ShardEntry e;
        e.manifest = detail::base_manifest(req, entries.size(), seed, WorldToPixel::centered(req.resolution));
        e.manifest.geometry = to_json(g);
        entries.push_back(std::move(e));
      }
    }
    curve += batch;
  }
  auto images = parallel_map(entries.size(), req.workers, [&](std::size_t i) { return rasterize(entries[i].manifest); });
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].images = std::move(images[i]);
  return out;
}

// As generate(), but any failure is an error.
inline std::vector<ShardEntry> generate_entries(const GenRequest& req) {
  auto out = generate(req);
  if (!out.failures.empty()) {
    const auto& f = out.failures.front();
    throw GenerationFailure(f.item + ": " + f.message, f.seed);
  }
  return std::move(out.entries);
}

// Writes `{root}/{task}/{split}/shard_{k:05}` directories of at most
// kShardSize instances each.
inline std::vector<ShardSummary> write_dataset(std::vector<ShardEntry> entries, const fs::path& root, Task task,
                                               const std::string& split, std::size_t shard_size = kShardSize) {
  std::vector<ShardSummary> out;
  for (std::size_t k = 0; k * shard_size < entries.size() || (k == 0 && entries.empty()); ++k) {
    const std::size_t lo = k * shard_size, hi = std::min(entries.size(), lo + shard_size);
    std::vector<ShardEntry> part(std::make_move_iterator(entries.begin() + static_cast<std::ptrdiff_t>(lo)),
                                 std::make_move_iterator(entries.begin() + static_cast<std::ptrdiff_t>(hi)));
    out.push_back(write_shard(std::move(part), shard_dir(root, task, split, k)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation of a solution image against the stored optimum.

struct EvalOptions {
  ExtractionThresholds thresholds{};
  SnapParams snap{};
};

struct ImageEvaluation {
  EvalRecord record;
  std::optional<std::string> failure;         // why the image is invalid
  nlohmann::json structure;                   // extracted geometry, pixel coordinates
};

inline bool is_planar(const PlaneGraph& g) {
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    for (std::size_t j = i + 1; j < g.edges.size(); ++j) {
      const auto kind = segment_intersect(g.segment(g.edges[i]), g.segment(g.edges[j]));
      if (kind == IntersectionKind::Proper || kind == IntersectionKind::CollinearOverlap) return false;
    }
  }
  return true;
}

inline ImageEvaluation evaluate_image(const InstanceManifest& m, const GrayImage& img, const EvalOptions& opt = {}) {
  opt.thresholds.validate();
  ImageEvaluation out;
  EvalRecord& r = out.record;
  r.instance_id = m.instance_id;
  r.seed = m.seed;
  const WorldToPixel& map = m.world_to_pixel;
  if (img.size() != manifest_resolution(m)) throw InvalidInput(m.instance_id + ": image resolution mismatch");

  switch (m.task) {
    case Task::Square: {
      const auto g = square_geometry(m);
      r.point_count = static_cast<int>(g.squares.size());
      const Polyline curve = make_polyline(map_points(map, g.curve), true);
      try {
        const Quad raw = extract_square(img);
        const auto snapped = snap_square_detailed(raw, curve, opt.snap);
        r.valid = true;
        r.primary_value = snapped.score;
        r.alignment_unsnapped = alignment_score(raw, curve);
        r.squareness = squareness(img);
        auto quad = nlohmann::json::array();
        for (const Point& p : snapped.quad.vertices) quad.push_back({p.x, p.y});
        out.structure = {{"quad", quad}, {"theta", snapped.theta},
                         {"translation", {snapped.translation.x, snapped.translation.y}}};
      } catch (const Error& e) {
        out.failure = e.what();
      }
      return out;
    }
    case Task::Steiner: {
      const auto g = steiner_geometry(m);
      r.point_count = static_cast<int>(g.terminals.size());
      const auto terminals = map_points(map, g.terminals);
      const auto nodes = detect_nodes(img, terminals, opt.thresholds);
      const PlaneGraph graph = extract_graph(img, nodes, opt.thresholds);
      auto edges = nlohmann::json::array();
      for (const auto& [a, b] : graph.edges) edges.push_back({a, b});
      out.structure = {{"vertices", points_json(graph.vertices)}, {"edges", edges}};
      if (graph.terminal_count() != terminals.size()) {
        out.failure = "not every terminal was detected";
      } else if (!is_tree(graph)) {
        out.failure = "extracted graph is not a tree";
      } else if (!is_planar(graph)) {
        out.failure = "extracted edges cross";
      } else {
        r.valid = true;
        r.primary_value = graph.total_length() / map.scale();
        r.ratio_vs_optimal = *r.primary_value / g.solution.total_length;
        PlaneGraph optimum = g.solution.graph;
        for (auto& v : optimum.vertices) v = map.apply(v);
        r.matches_optimal = graphs_match(graph, optimum, 1.0);
      }
      return out;
    }
    case Task::Maxap: {
      const auto g = maxap_geometry(m);
      r.point_count = static_cast<int>(g.points.size());
      try {
        const auto poly = extract_polygon(img, map_points(map, g.points), opt.thresholds);
        std::vector<Point> world;
        for (std::size_t i : poly.order) world.push_back(g.points[i]);
        r.valid = true;
        r.primary_value = std::abs(signed_area(world));
        r.ratio_vs_optimal = *r.primary_value / g.solution.area;
        r.matches_optimal = cycles_equal(poly.order, g.solution.order);
        out.structure = {{"order", poly.order}};
      } catch (const ExtractionFailure& e) {
        out.failure = e.what();
      }
      return out;
    }
  }
  throw InvalidInput("unknown task");
}

}  // namespace geopix
