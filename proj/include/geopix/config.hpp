#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "errors.hpp"
#include "extract.hpp"
#include "pipeline.hpp"
#include "tasks.hpp"

namespace geopix {

struct RunConfig {
  Task task = Task::Maxap;
  std::map<std::string, std::size_t> splits;  // split name -> instance count
  std::optional<std::pair<std::size_t, std::size_t>> points;  // task default when unset
  std::uint64_t seed = 0;
  int resolution = kDefaultResolution;
  std::string out = "data";
  int workers = 1;
  std::string mode = "exact";
  int best_of = 10;
  ExtractionThresholds thresholds{};
  SnapParams snap{};
  RenderClearance clearance{};
  int retry_budget = 200;

  std::pair<std::size_t, std::size_t> point_range() const {
    if (points) return *points;
    switch (task) {
      case Task::Square: return {1, 5};
      case Task::Steiner: return {4, 8};
      case Task::Maxap: return {7, 12};
    }
    return {0, 0};
  }

  GenRequest request(const std::string& split, std::size_t count) const {
    GenRequest r;
    r.task = task;
    r.split = split;
    r.seed = seed;
    r.count = count;
    std::tie(r.min_points, r.max_points) = point_range();
    r.resolution = resolution;
    r.workers = workers;
    r.clearance = clearance;
    r.retry_budget = retry_budget;
    return r;
  }

  void validate() const {
    for (const auto& [split, count] : splits) request(split, count).validate();
    if (splits.empty()) request("train", 0).validate();
    if (workers < 1) throw InvalidInput("workers must be at least 1");
    if (best_of < 1) throw InvalidInput("best-of must be at least 1");
    if (retry_budget < 1) throw InvalidInput("retry budget must be at least 1");
    if (!(clearance.vertex_gap >= 0.0 && clearance.edge_gap >= 0.0)) {
      throw InvalidInput("clearance gaps must be non-negative");
    }
    parse_steiner_mode(mode);
    thresholds.validate();
    snap.validate();
  }
};

// "A..B" or a single "N".
inline std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  auto number = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty()) {
      throw InvalidInput("invalid point range '" + s + "' (expected A..B)");
    }
    return v;
  };
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const auto n = number(s);
    return {n, n};
  }
  const auto lo = number(std::string_view(s).substr(0, dots));
  const auto hi = number(std::string_view(s).substr(dots + 2));
  if (lo > hi) throw InvalidInput("invalid point range '" + s + "' (A > B)");
  return {lo, hi};
}

namespace detail {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where) {
  if (!j.is_object()) throw InvalidInput(std::string(where) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
      throw InvalidInput("unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace detail

// Overlays the keys present in `j`; absent keys keep their current values.
inline void apply_thresholds_json(ExtractionThresholds& th, SnapParams& snap, const nlohmann::json& j) {
  detail::reject_unknown(j,
                         {"binarize_white", "binarize_black", "edge_fraction", "snap_radius", "close_vertex_dist",
                          "collinear_angle", "endpoint_exclusion", "snap"},
                         "thresholds");
  detail::take(j, "binarize_white", th.binarize_white);
  detail::take(j, "binarize_black", th.binarize_black);
  detail::take(j, "edge_fraction", th.edge_fraction);
  detail::take(j, "snap_radius", th.snap_radius);
  detail::take(j, "close_vertex_dist", th.close_vertex_dist);
  detail::take(j, "collinear_angle", th.collinear_angle);
  detail::take(j, "endpoint_exclusion", th.endpoint_exclusion);
  if (j.contains("snap")) {
    const auto& s = j.at("snap");
    detail::reject_unknown(s, {"theta_min", "theta_max", "theta_step", "translation_radius"}, "thresholds.snap");
    detail::take(s, "theta_min", snap.theta_min);
    detail::take(s, "theta_max", snap.theta_max);
    detail::take(s, "theta_step", snap.theta_step);
    detail::take(s, "translation_radius", snap.translation_radius);
  }
}

inline void apply_json(RunConfig& c, const nlohmann::json& j) {
  try {
    detail::reject_unknown(j,
                           {"task", "splits", "points", "seed", "resolution", "out", "workers", "mode", "best_of",
                            "thresholds", "clearance", "retry_budget"},
                           "config");
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    detail::take(j, "splits", c.splits);
    if (j.contains("points")) {
      const auto& p = j.at("points");
      c.points = p.is_string() ? parse_range(p.get<std::string>())
                               : std::pair{p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()};
    }
    detail::take(j, "seed", c.seed);
    detail::take(j, "resolution", c.resolution);
    detail::take(j, "out", c.out);
    detail::take(j, "workers", c.workers);
    detail::take(j, "mode", c.mode);
    detail::take(j, "best_of", c.best_of);
    detail::take(j, "retry_budget", c.retry_budget);
    if (j.contains("thresholds")) apply_thresholds_json(c.thresholds, c.snap, j.at("thresholds"));
    if (j.contains("clearance")) {
      const auto& cl = j.at("clearance");
      detail::reject_unknown(cl, {"vertex_gap", "edge_gap"}, "clearance");
      detail::take(cl, "vertex_gap", c.clearance.vertex_gap);
      detail::take(cl, "edge_gap", c.clearance.edge_gap);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

inline nlohmann::json to_json(const RunConfig& c) {
  const auto [lo, hi] = c.point_range();
  const auto& th = c.thresholds;
  return {{"task", to_string(c.task)},
          {"splits", c.splits},
          {"points", {lo, hi}},
          {"seed", c.seed},
          {"resolution", c.resolution},
          {"out", c.out},
          {"workers", c.workers},
          {"mode", c.mode},
          {"best_of", c.best_of},
          {"retry_budget", c.retry_budget},
          {"clearance", {{"vertex_gap", c.clearance.vertex_gap}, {"edge_gap", c.clearance.edge_gap}}},
          {"thresholds",
           {{"binarize_white", th.binarize_white},
            {"binarize_black", th.binarize_black},
            {"edge_fraction", th.edge_fraction},
            {"snap_radius", th.snap_radius},
            {"close_vertex_dist", th.close_vertex_dist},
            {"collinear_angle", th.collinear_angle},
            {"endpoint_exclusion", th.endpoint_exclusion},
            {"snap",
             {{"theta_min", c.snap.theta_min},
              {"theta_max", c.snap.theta_max},
              {"theta_step", c.snap.theta_step},
              {"translation_radius", c.snap.translation_radius}}}}}};
}

// Inline JSON when the text starts with '{', otherwise a file path.
inline nlohmann::json load_json_arg(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '{') return nlohmann::json::parse(text);
    std::ifstream in(text);
    if (!in) throw InvalidInput("cannot read " + text);
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("invalid JSON in " + text + ": " + e.what());
  }
}

}  // namespace geopix
