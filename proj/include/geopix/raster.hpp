#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <utility>
#include <vector>

#include "curvegen.hpp"
#include "geometry.hpp"
#include "image.hpp"

namespace geopix {

// Deterministic, non-antialiased rasterization of instances and solutions.
// Pixel membership is decided at pixel centers, lines follow Bresenham.

struct RasterPalette {
  std::uint8_t background;
  std::uint8_t edge;
  std::uint8_t node;
  std::uint8_t fill;
};

inline constexpr std::uint8_t kBlack = 0;
inline constexpr std::uint8_t kGray = 128;
inline constexpr std::uint8_t kWhite = 255;

inline constexpr RasterPalette kSquarePalette{kBlack, kWhite, kWhite, kWhite};
inline constexpr RasterPalette kSteinerPalette{kGray, kWhite, kBlack, kGray};
inline constexpr RasterPalette kPolygonPalette{kGray, kWhite, kBlack, kBlack};

inline constexpr int kDefaultResolution = 128;
inline constexpr int kNodeRadius = 2;
inline constexpr int kSteinerEdgeWidth = 2;
inline constexpr int kPolygonEdgeWidth = 1;

// Point tasks map the unit square onto the whole canvas (one world unit per
// image width); generators keep points away from the border.
inline WorldToPixel point_task_map(int size) { return WorldToPixel::unit_square(size, 0.0); }

namespace detail {

template <typename Visit>
void bresenham_forward(PixelIndex a, PixelIndex b, Visit&& visit) {
  int x = a.col, y = a.row;
  const int dx = std::abs(b.col - a.col), dy = -std::abs(b.row - a.row);
  const int sx = a.col < b.col ? 1 : -1, sy = a.row < b.row ? 1 : -1;
  int err = dx + dy;
  while (true) {
    visit(x, y);
    if (x == b.col && y == b.row) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

}  // namespace detail

// Visits the pixels from a to b. The pixel set does not depend on the
// direction: lines are always traced from the lexicographically smaller end.
template <typename Visit>
void bresenham(PixelIndex a, PixelIndex b, Visit&& visit) {
  if (std::pair(a.col, a.row) <= std::pair(b.col, b.row)) {
    detail::bresenham_forward(a, b, visit);
    return;
  }
  std::vector<PixelIndex> pixels;
  detail::bresenham_forward(b, a, [&](int x, int y) { pixels.push_back({x, y}); });
  for (auto it = pixels.rbegin(); it != pixels.rend(); ++it) visit(it->col, it->row);
}

inline std::vector<PixelIndex> bresenham_pixels(PixelIndex a, PixelIndex b) {
  std::vector<PixelIndex> out;
  bresenham(a, b, [&](int x, int y) { out.push_back({x, y}); });
  return out;
}

// Pixels whose centers lie within width/2 of the stamp center. Odd widths
// center on the pixel, even widths on its lower-right corner.
inline std::vector<PixelIndex> stamp_offsets(int width) {
  std::vector<PixelIndex> out;
  const double r = 0.5 * width;
  const double c = (width % 2 == 0) ? 0.5 : 0.0;
  const int reach = width;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      if (std::hypot(dx - c, dy - c) <= r + 1e-9) out.push_back({dx, dy});
    }
  }
  return out;
}

inline void draw_line(GrayImage& img, PixelIndex a, PixelIndex b, std::uint8_t value, int width = 1) {
  const auto offsets = stamp_offsets(width);
  bresenham(a, b, [&](int x, int y) {
    for (const auto& o : offsets) img.set(x + o.col, y + o.row, value);
  });
}

// Discrete disk: pixels with (dx^2 + dy^2) <= r^2 around the given pixel.
inline void draw_disk(GrayImage& img, PixelIndex c, int radius, std::uint8_t value) {
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) img.set(c.col + dx, c.row + dy, value);
    }
  }
}

// Even-odd fill of every pixel whose center is inside the polygon
// (continuous pixel coordinates).
inline void fill_polygon(GrayImage& img, std::span<const Point> poly, std::uint8_t value) {
  const std::size_t n = poly.size();
  if (n < 3) return;
  std::vector<double> xs;
  for (int row = 0; row < img.height(); ++row) {
    const double y = row + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point a = poly[i], b = poly[(i + 1) % n];
      if ((a.y > y) != (b.y > y)) xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int first = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int last = std::min(img.width() - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      for (int col = first; col <= last; ++col) img.at(col, row) = value;
    }
  }
}

inline void draw_closed_polyline(GrayImage& img, std::span<const Point> pts, std::uint8_t value) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    draw_line(img, to_pixel(pts[i]), to_pixel(pts[(i + 1) % pts.size()]), value, 1);
  }
}

inline std::vector<Point> map_points(const WorldToPixel& map, std::span<const Point> pts) {
  std::vector<Point> out;
  out.reserve(pts.size());
  for (const Point& p : pts) out.push_back(map.apply(p));
  return out;
}

struct ImagePair {
  GrayImage condition;
  GrayImage solution;
};

// Curve stroke as condition, one filled square as solution (binary images).
inline ImagePair rasterize_square_pair(const CurveInstance& inst, std::size_t square_index,
                                       int size = kDefaultResolution) {
  if (square_index >= inst.squares.size()) throw InvalidInput("square index out of range");
  const auto map = WorldToPixel::centered(size);
  ImagePair out{GrayImage(size, kSquarePalette.background), GrayImage(size, kSquarePalette.background)};
  draw_closed_polyline(out.condition, map_points(map, inst.curve.points), kSquarePalette.edge);
  const auto v = inst.squares[square_index].vertices();
  fill_polygon(out.solution, map_points(map, v), kSquarePalette.fill);
  return out;
}

// Condition: terminals only. Solution: 2px white edges, then black disks on
// every vertex so that nodes occlude edge ends.
inline ImagePair rasterize_steiner_pair(std::span<const Point> terminals, const PlaneGraph& sol,
                                        int size = kDefaultResolution) {
  const auto map = point_task_map(size);
  ImagePair out{GrayImage(size, kSteinerPalette.background), GrayImage(size, kSteinerPalette.background)};
  for (const Point& p : terminals) draw_disk(out.condition, to_pixel(map.apply(p)), kNodeRadius, kSteinerPalette.node);
  for (const auto& [a, b] : sol.edges) {
    draw_line(out.solution, to_pixel(map.apply(sol.vertices[a])), to_pixel(map.apply(sol.vertices[b])),
              kSteinerPalette.edge, kSteinerEdgeWidth);
  }
  for (const Point& p : sol.vertices) draw_disk(out.solution, to_pixel(map.apply(p)), kNodeRadius, kSteinerPalette.node);
  return out;
}

// Condition: input points as black disks. Solution: black interior, 1px
// white boundary, gray outside.
inline ImagePair rasterize_polygon_pair(std::span<const Point> points, const SimplePolygon& poly,
                                        int size = kDefaultResolution) {
  const auto map = point_task_map(size);
  ImagePair out{GrayImage(size, kPolygonPalette.background), GrayImage(size, kPolygonPalette.background)};
  for (const Point& p : points) draw_disk(out.condition, to_pixel(map.apply(p)), kNodeRadius, kPolygonPalette.node);
  const auto verts = map_points(map, poly.vertices);
  fill_polygon(out.solution, verts, kPolygonPalette.fill);
  draw_closed_polyline(out.solution, verts, kPolygonPalette.edge);
  return out;
}

}  // namespace geopix
