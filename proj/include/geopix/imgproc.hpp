#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "geometry.hpp"
#include "image.hpp"

namespace geopix {

struct Component {
  std::vector<PixelIndex> pixels;  // raster order

  // Mean of pixel centers, continuous pixel coordinates.
  Point centroid() const {
    Point c;
    for (const auto& p : pixels) c = c + pixel_center(p.col, p.row);
    return pixels.empty() ? c : c / static_cast<double>(pixels.size());
  }
};

// Binary mask view: foreground where the predicate holds.
class BinaryMask {
 public:
  BinaryMask(const GrayImage& img, const std::function<bool(std::uint8_t)>& fg)
      : size_(img.size()), bits_(img.data().size()) {
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] = fg(img.data()[i]);
  }

  int size() const { return size_; }
  bool operator()(int col, int row) const {
    return col >= 0 && row >= 0 && col < size_ && row < size_ &&
           bits_[static_cast<std::size_t>(row) * size_ + col];
  }

 private:
  int size_;
  std::vector<char> bits_;
};

// 8-connected components, ordered by their first pixel in raster order.
inline std::vector<Component> connected_components(const BinaryMask& mask) {
  const int n = mask.size();
  std::vector<int> label(static_cast<std::size_t>(n) * n, -1);
  std::vector<Component> out;
  std::vector<PixelIndex> stack;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      if (!mask(col, row) || label[static_cast<std::size_t>(row) * n + col] >= 0) continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      stack.assign(1, {col, row});
      label[static_cast<std::size_t>(row) * n + col] = id;
      while (!stack.empty()) {
        const PixelIndex p = stack.back();
        stack.pop_back();
        out[id].pixels.push_back(p);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int x = p.col + dx, y = p.row + dy;
            if (!mask(x, y)) continue;
            int& l = label[static_cast<std::size_t>(y) * n + x];
            if (l < 0) {
              l = id;
              stack.push_back({x, y});
            }
          }
        }
      }
      std::sort(out[id].pixels.begin(), out[id].pixels.end(), [](PixelIndex a, PixelIndex b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
      });
    }
  }
  return out;
}

// Largest component by pixel count; earliest wins ties.
inline const Component* largest_component(const std::vector<Component>& comps) {
  const Component* best = nullptr;
  for (const auto& c : comps) {
    if (!best || c.pixels.size() > best->pixels.size()) best = &c;
  }
  return best;
}

// Outer boundary of a component by Moore-neighbour tracing. Tracing stops
// once the start pixel is about to be left towards the second pixel again.
// Returns boundary pixels in clockwise (screen) order.
inline std::vector<PixelIndex> trace_outer_contour(const Component& comp) {
  if (comp.pixels.empty()) return {};
  auto inside = [&](int col, int row) {
    return std::binary_search(comp.pixels.begin(), comp.pixels.end(), PixelIndex{col, row},
                              [](PixelIndex a, PixelIndex b) {
                                return a.row != b.row ? a.row < b.row : a.col < b.col;
                              });
  };
  static constexpr std::array<PixelIndex, 8> dirs{PixelIndex{1, 0}, {1, 1},  {0, 1},  {-1, 1},
                                                  {-1, 0},          {-1, -1}, {0, -1}, {1, -1}};
  auto dir_of = [](PixelIndex from, PixelIndex to) {
    for (int d = 0; d < 8; ++d) {
      if (from.col + dirs[d].col == to.col && from.row + dirs[d].row == to.row) return d;
    }
    return 4;
  };

  const PixelIndex start = comp.pixels.front();
  std::vector<PixelIndex> contour{start};
  PixelIndex p = start, back{start.col - 1, start.row};
  const std::size_t limit = 8 * comp.pixels.size() + 8;
  while (contour.size() < limit) {
    const int d0 = dir_of(p, back);
    bool found = false;
    PixelIndex next{}, next_back{};
    for (int k = 1; k <= 8; ++k) {
      const int d = (d0 + k) % 8;
      const PixelIndex c{p.col + dirs[d].col, p.row + dirs[d].row};
      if (inside(c.col, c.row)) {
        const int pd = (d + 7) % 8;
        next = c;
        next_back = {p.col + dirs[pd].col, p.row + dirs[pd].row};
        found = true;
        break;
      }
    }
    if (!found) break;  // isolated pixel
    if (p == start && contour.size() > 1 && next == contour[1]) {
      contour.pop_back();
      break;
    }
    contour.push_back(next);
    p = next;
    back = next_back;
  }
  return contour;
}

inline std::vector<Point> contour_centers(const std::vector<PixelIndex>& contour) {
  std::vector<Point> pts;
  pts.reserve(contour.size());
  for (const auto& p : contour) pts.push_back(pixel_center(p.col, p.row));
  return pts;
}

}  // namespace geopix
