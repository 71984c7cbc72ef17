#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "maxap.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"

namespace geopix {

// ---------------------------------------------------------------------------
// Baseline and oracle solutions for stored instances.

struct SolveResult {
  GrayImage image;
  nlohmann::json geometry;
  double value = 0.0;                       // length or area, world units
  std::optional<double> ratio_vs_reference;  // against the stored solution
};

inline void check_solve_mode(Task task, SteinerMode mode) {
  if (task == Task::Square) throw InvalidInput("solve supports the steiner and maxap tasks");
  if (task == Task::Maxap && mode != SteinerMode::Exact && mode != SteinerMode::Random) {
    throw InvalidInput("maxap supports the exact and random modes");
  }
}

inline SolveResult solve_instance(const InstanceManifest& m, SteinerMode mode, std::uint64_t seed) {
  check_solve_mode(m.task, mode);
  SolveResult out;
  if (m.task == Task::Steiner) {
    const auto g = steiner_geometry(m);
    SteinerGeometry solved{g.terminals, solve_steiner(g.terminals, mode, seed), g.resolution};
    out.image = rasterize_steiner_pair(solved.terminals, solved.solution.graph, g.resolution).solution;
    out.geometry = to_json(solved).at("solution");
    out.value = solved.solution.total_length;
    out.ratio_vs_reference = out.value / g.solution.total_length;
  } else {
    const auto g = maxap_geometry(m);
    MaxapGeometry solved{g.points,
                         mode == SteinerMode::Exact ? solve_exact_dfs(g.points) : random_simple_polygon(g.points, seed),
                         g.resolution};
    out.image = rasterize_polygon_pair(solved.points, solved.solution.polygon, g.resolution).solution;
    out.geometry = to_json(solved).at("solution");
    out.value = solved.solution.area;
    out.ratio_vs_reference = out.value / g.solution.area;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records and reports.

inline nlohmann::json to_json(const EvalRecord& r) {
  nlohmann::json j{{"instance_id", r.instance_id},
                   {"seed", r.seed},
                   {"point_count", r.point_count},
                   {"valid", r.valid},
                   {"matches_optimal", r.matches_optimal}};
  if (r.primary_value) j["primary_value"] = *r.primary_value;
  if (r.ratio_vs_optimal) j["ratio_vs_optimal"] = *r.ratio_vs_optimal;
  if (r.squareness) j["squareness"] = *r.squareness;
  if (r.alignment_unsnapped) j["alignment_unsnapped"] = *r.alignment_unsnapped;
  return j;
}

// Alignment is maximized like area.
inline Objective best_of_objective(Task t) { return t == Task::Steiner ? Objective::MinLength : Objective::MaxArea; }

// One record per instance (sorted by id) from the K lowest-seed samples.
inline std::vector<EvalRecord> best_of_k_per_instance(const std::vector<EvalRecord>& records, int k, Task task) {
  if (k < 1) throw InvalidInput("best-of must be at least 1");
  std::map<std::string, std::vector<EvalRecord>> groups;
  for (const auto& r : records) groups[r.instance_id].push_back(r);
  std::vector<EvalRecord> out;
  for (auto& [id, rs] : groups) {
    std::stable_sort(rs.begin(), rs.end(), [](const EvalRecord& a, const EvalRecord& b) { return a.seed < b.seed; });
    if (rs.size() > static_cast<std::size_t>(k)) rs.resize(static_cast<std::size_t>(k));
    out.push_back(best_of_k(rs, best_of_objective(task)));
  }
  return out;
}

// "4-6,7-9" style bucket list; empty text means a single "all" bucket.
inline std::vector<SizeBucket> parse_buckets(const std::string& text) {
  if (text.empty()) return {SizeBucket{}};
  std::vector<SizeBucket> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const std::string part = text.substr(start, end - start);
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        const int n = std::stoi(part);
        out.push_back({n, n});
      } else {
        out.push_back({std::stoi(part.substr(0, dash)), std::stoi(part.substr(dash + 1))});
      }
    } catch (const std::exception&) {
      throw InvalidInput("invalid bucket '" + part + "'");
    }
    if (out.back().lo > out.back().hi) throw InvalidInput("invalid bucket '" + part + "'");
    start = end + 1;
  }
  return out;
}

inline nlohmann::json to_json(const ReportRow& row) {
  auto ms = [](const std::optional<MeanStd>& m) -> nlohmann::json {
    if (!m) return nullptr;
    return {{"mean", m->mean}, {"std", m->std}};
  };
  return {{"bucket", row.bucket},
          {"total", row.total},
          {"valid_rate", row.valid_rate},
          {"ratio", ms(row.ratio)},
          {"optimal_rate", row.optimal_rate},
          {"primary", ms(row.primary)},
          {"primary_unsnapped", ms(row.primary_unsnapped)},
          {"squareness", ms(row.squareness)}};
}

inline std::string report_csv(const std::vector<ReportRow>& rows) {
  auto cell = [](const std::optional<MeanStd>& m) {
    if (!m) return std::string(",");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", m->mean, m->std);
    return std::string(buf);
  };
  std::string out =
      "bucket,total,valid_rate,ratio_mean,ratio_std,optimal_rate,primary_mean,primary_std,"
      "primary_unsnapped_mean,primary_unsnapped_std,squareness_mean,squareness_std\n";
  for (const auto& r : rows) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s,%zu,%.6f,", r.bucket.c_str(), r.total, r.valid_rate);
    out += buf;
    out += cell(r.ratio);
    std::snprintf(buf, sizeof buf, ",%.6f,", r.optimal_rate);
    out += buf;
    out += cell(r.primary) + "," + cell(r.primary_unsnapped) + "," + cell(r.squareness) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Side-by-side comparison: optimal | produced | difference.

inline bool is_foreground(Task task, std::uint8_t v) {
  if (task == Task::Square) return v >= kMaskThreshold;
  return std::abs(static_cast<int>(v) - static_cast<int>(kGray)) > 64;
}

inline constexpr Rgb kOnlyOptimal{220, 30, 30};
inline constexpr Rgb kOnlyProduced{30, 60, 220};
inline constexpr Rgb kBoth{150, 150, 150};
inline constexpr Rgb kNeither{255, 255, 255};
inline constexpr int kPanelGap = 4;

inline RgbImage comparison_panel(Task task, const GrayImage& optimal, const GrayImage& produced) {
  if (optimal.size() != produced.size()) throw InvalidInput("comparison images differ in size");
  const int s = optimal.size();
  RgbImage out(3 * s + 2 * kPanelGap, s, Rgb{0, 0, 0});
  for (int row = 0; row < s; ++row) {
    for (int col = 0; col < s; ++col) {
      const auto a = optimal.at(col, row), b = produced.at(col, row);
      out.at(col, row) = {a, a, a};
      out.at(s + kPanelGap + col, row) = {b, b, b};
      const bool fa = is_foreground(task, a), fb = is_foreground(task, b);
      out.at(2 * (s + kPanelGap) + col, row) = fa && fb ? kBoth : fa ? kOnlyOptimal : fb ? kOnlyProduced : kNeither;
    }
  }
  return out;
}

}  // namespace geopix
