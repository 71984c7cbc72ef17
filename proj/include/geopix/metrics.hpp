#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "imgproc.hpp"

namespace geopix {

// Four points in cyclic order, pixel coordinates.
struct Quad {
  std::array<Point, 4> vertices;

  double area() const { return shoelace_area(vertices); }
  Point center() const { return centroid(vertices); }

  static Quad from_rect(const RotatedRect& r) {
    const auto c = r.corners();
    return Quad{{c[0], c[1], c[2], c[3]}};
  }

  friend bool operator==(const Quad&, const Quad&) = default;
};

// Negative mean corner-to-curve distance; 0 when every corner is on the curve.
inline double alignment_score(const Quad& q, const Polyline& curve) {
  double sum = 0.0;
  for (const Point& p : q.vertices) sum += point_to_polyline_distance(p, curve);
  return -0.25 * sum;
}

// Fill ratio inside the minimum-area enclosing rectangle times an
// exponential aspect penalty.
inline double squareness(double area, const RotatedRect& rect) {
  const double lo = std::min(rect.width, rect.height), hi = std::max(rect.width, rect.height);
  if (lo <= 0.0) throw DegenerateGeometry("enclosing rectangle has zero width");
  return (area / (rect.width * rect.height)) * std::exp(-2.0 * std::abs(hi / lo - 1.0));
}

inline double squareness(const Quad& q) { return squareness(q.area(), min_area_rect(q.vertices)); }

inline double squareness(const SimplePolygon& poly) {
  return squareness(shoelace_area(poly), min_area_rect(poly.vertices));
}

inline constexpr std::uint8_t kMaskThreshold = 128;

// Outer contour (pixel centers) of the largest foreground component.
inline std::vector<Point> mask_contour(const GrayImage& mask) {
  const BinaryMask bin(mask, [](std::uint8_t v) { return v >= kMaskThreshold; });
  const auto comps = connected_components(bin);
  const Component* largest = largest_component(comps);
  if (!largest) throw ExtractionFailure("mask has no foreground pixels");
  return contour_centers(trace_outer_contour(*largest));
}

// Mask squareness uses the contour polygon area.
inline double squareness(const GrayImage& mask) {
  const auto contour = mask_contour(mask);
  return squareness(std::abs(signed_area(contour)), min_area_rect(contour));
}

// ---------------------------------------------------------------------------
// Evaluation records and aggregation.

enum class Objective { MinLength, MaxArea };

struct EvalRecord {
  std::string instance_id;
  std::uint64_t seed = 0;
  int point_count = 0;
  bool valid = false;
  std::optional<double> primary_value;     // length, area or alignment
  std::optional<double> ratio_vs_optimal;  // only when valid and optimum known
  std::optional<double> squareness;        // square task only
  std::optional<double> alignment_unsnapped;  // square task only
  bool matches_optimal = false;
};

inline EvalRecord best_of_k(const std::vector<EvalRecord>& records, Objective objective) {
  if (records.empty()) throw InvalidInput("best_of_k needs at least one record");
  const EvalRecord* best = nullptr;
  for (const auto& r : records) {
    if (!r.valid || !r.primary_value) continue;
    if (!best) {
      best = &r;
      continue;
    }
    const bool better = objective == Objective::MinLength ? *r.primary_value < *best->primary_value
                                                          : *r.primary_value > *best->primary_value;
    if (better) best = &r;
  }
  if (best) return *best;
  EvalRecord marker;
  marker.instance_id = records.front().instance_id;
  marker.seed = records.front().seed;
  marker.point_count = records.front().point_count;
  return marker;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

// Inclusive point-count range; {lo, hi} = {0, max} groups everything.
struct SizeBucket {
  int lo = 0;
  int hi = 1 << 30;

  bool contains(int n) const { return n >= lo && n <= hi; }
  std::string label() const {
    if (lo == 0 && hi == (1 << 30)) return "all";
    return std::to_string(lo) + "-" + std::to_string(hi);
  }
};

struct ReportRow {
  std::string bucket;
  std::size_t total = 0;
  double valid_rate = 0.0;
  std::optional<MeanStd> ratio;
  double optimal_rate = 0.0;
  std::optional<MeanStd> primary;  // alignment for squares
  std::optional<MeanStd> primary_unsnapped;
  std::optional<MeanStd> squareness;
};

inline std::vector<ReportRow> aggregate_report(const std::vector<EvalRecord>& records,
                                               const std::vector<SizeBucket>& buckets) {
  std::vector<ReportRow> rows;
  for (const auto& bucket : buckets) {
    std::vector<double> ratios, primaries, unsnapped, squares;
    std::size_t total = 0, valid = 0, optimal = 0;
    for (const auto& r : records) {
      if (!bucket.contains(r.point_count)) continue;
      ++total;
      if (!r.valid) continue;
      ++valid;
      optimal += r.matches_optimal;
      if (r.ratio_vs_optimal) ratios.push_back(*r.ratio_vs_optimal);
      if (r.primary_value) primaries.push_back(*r.primary_value);
      if (r.alignment_unsnapped) unsnapped.push_back(*r.alignment_unsnapped);
      if (r.squareness) squares.push_back(*r.squareness);
    }
    if (total == 0) continue;
    ReportRow row;
    row.bucket = bucket.label();
    row.total = total;
    row.valid_rate = static_cast<double>(valid) / static_cast<double>(total);
    row.optimal_rate = static_cast<double>(optimal) / static_cast<double>(total);
    if (!ratios.empty()) row.ratio = mean_std(ratios);
    if (!primaries.empty()) row.primary = mean_std(primaries);
    if (!unsnapped.empty()) row.primary_unsnapped = mean_std(unsnapped);
    if (!squares.empty()) row.squareness = mean_std(squares);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Exact-match tests used for the optimal rate.

// Vertices of `a` are matched to the nearest vertex of `b` within `tol`
// (one-to-one); the graphs match when the mapped edge sets are equal.
inline bool graphs_match(const PlaneGraph& a, const PlaneGraph& b, double tol) {
  if (a.vertices.size() != b.vertices.size() || a.edges.size() != b.edges.size()) return false;
  std::vector<std::size_t> map(a.vertices.size());
  std::vector<bool> used(b.vertices.size(), false);
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    std::size_t best = b.vertices.size();
    double best_d = tol;
    for (std::size_t j = 0; j < b.vertices.size(); ++j) {
      const double d = distance(a.vertices[i], b.vertices[j]);
      if (!used[j] && d <= best_d) {
        best = j;
        best_d = d;
      }
    }
    if (best == b.vertices.size()) return false;
    used[best] = true;
    map[i] = best;
  }
  std::vector<std::pair<std::size_t, std::size_t>> mapped;
  for (const auto& [u, v] : a.edges) mapped.emplace_back(std::min(map[u], map[v]), std::max(map[u], map[v]));
  auto expected = b.edges;
  std::sort(mapped.begin(), mapped.end());
  std::sort(expected.begin(), expected.end());
  return mapped == expected;
}

// Cycles over the same index set, equal up to rotation and reflection.
inline bool cycles_equal(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  const std::size_t n = a.size();
  if (n != b.size()) return false;
  if (n == 0) return true;
  const auto it = std::find(b.begin(), b.end(), a[0]);
  if (it == b.end()) return false;
  const std::size_t off = static_cast<std::size_t>(it - b.begin());
  bool forward = true, backward = true;
  for (std::size_t i = 0; i < n; ++i) {
    forward = forward && a[i] == b[(off + i) % n];
    backward = backward && a[i] == b[(off + n - i) % n];
  }
  return forward || backward;
}

}  // namespace geopix
