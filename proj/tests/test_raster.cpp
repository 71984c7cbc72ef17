#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "geopix/imgproc.hpp"
#include "geopix/raster.hpp"
#include "geopix/rng.hpp"

using namespace geopix;

namespace {

int count_value(const GrayImage& img, std::uint8_t v) {
  int n = 0;
  for (auto px : img.data()) n += px == v;
  return n;
}

// 4-connected component count of pixels equal to `v`, by flood fill.
int count_4_components(const GrayImage& img, std::uint8_t v) {
  const int n = img.size();
  std::vector<char> seen(static_cast<std::size_t>(n) * n, 0);
  int comps = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (img.at(c, r) != v || seen[r * n + c]) continue;
      ++comps;
      std::vector<PixelIndex> st{{c, r}};
      seen[r * n + c] = 1;
      while (!st.empty()) {
        auto p = st.back();
        st.pop_back();
        const PixelIndex nb[4] = {{p.col + 1, p.row}, {p.col - 1, p.row}, {p.col, p.row + 1}, {p.col, p.row - 1}};
        for (auto q : nb) {
          if (!img.contains(q.col, q.row) || img.at(q.col, q.row) != v || seen[q.row * n + q.col]) continue;
          seen[q.row * n + q.col] = 1;
          st.push_back(q);
        }
      }
    }
  }
  return comps;
}

}  // namespace

TEST(Bresenham, EndpointsAndConnectivity) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    PixelIndex a{int(rng.uniform_int(0, 60)), int(rng.uniform_int(0, 60))};
    PixelIndex b{int(rng.uniform_int(0, 60)), int(rng.uniform_int(0, 60))};
    const auto px = bresenham_pixels(a, b);
    ASSERT_EQ(px.front(), a);
    ASSERT_EQ(px.back(), b);
    EXPECT_EQ(px.size(), std::size_t(std::max(std::abs(a.col - b.col), std::abs(a.row - b.row)) + 1));
    for (std::size_t i = 1; i < px.size(); ++i) {
      EXPECT_LE(std::abs(px[i].col - px[i - 1].col), 1);
      EXPECT_LE(std::abs(px[i].row - px[i - 1].row), 1);
    }
  }
}

TEST(Raster, DiskHasThirteenPixels) {
  GrayImage img(16, kGray);
  draw_disk(img, {8, 8}, kNodeRadius, kBlack);
  EXPECT_EQ(count_value(img, kBlack), 13);
}

TEST(Raster, StampWidths) {
  EXPECT_EQ(stamp_offsets(1).size(), 1u);
  EXPECT_EQ(stamp_offsets(2).size(), 4u);
}

TEST(Raster, AxisAlignedSquareFillCount) {
  // Side 0.5 in [-1,1]^2 at 128 px is 32 px.
  CurveInstance inst;
  std::vector<Point> ring;
  for (int i = 0; i < 500; ++i) {
    const double t = kTwoPi * i / 500;
    ring.push_back({0.6 * std::cos(t), 0.6 * std::sin(t)});
  }
  inst.curve = make_polyline(ring, true);
  inst.squares.push_back({{0.013, -0.021}, 0.5, 0.0});
  const auto pair = rasterize_square_pair(inst, 0, 128);
  EXPECT_NEAR(count_value(pair.solution, kWhite), 1024, 1024 * 0.04);
  EXPECT_EQ(count_value(pair.solution, kWhite) + count_value(pair.solution, kBlack), 128 * 128);

  // The curve stroke is one closed 8-connected loop splitting the background in two.
  BinaryMask stroke(pair.condition, [](std::uint8_t v) { return v == kWhite; });
  EXPECT_EQ(connected_components(stroke).size(), 1u);
  EXPECT_EQ(count_4_components(pair.condition, kBlack), 2);
}

TEST(Raster, RotatedSquareAreaWithinTolerance) {
  Rng rng(11);
  CurveInstance inst;
  inst.curve = make_polyline(std::vector<Point>{{-1, -1}, {1, -1}, {1, 1}}, true);
  for (int t = 0; t < 50; ++t) {
    const double side = rng.uniform(0.3, 0.7), theta = rng.uniform(0, kPi);
    inst.squares.assign(1, {{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)}, side, theta});
    const auto pair = rasterize_square_pair(inst, 0, 128);
    const double expected = side * side * 64 * 64;
    EXPECT_NEAR(count_value(pair.solution, kWhite), expected, expected * 0.04);
  }
}

TEST(Raster, SteinerPairPalette) {
  const std::vector<Point> terms{{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.8}};
  PlaneGraph g;
  for (auto p : terms) g.add_vertex(p, true);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const auto a = rasterize_steiner_pair(terms, g);
  const auto b = rasterize_steiner_pair(terms, g);
  EXPECT_EQ(a.condition, b.condition);
  EXPECT_EQ(a.solution, b.solution);
  EXPECT_EQ(count_value(a.condition, kBlack), 3 * 13);
  EXPECT_EQ(count_value(a.condition, kGray), 128 * 128 - 3 * 13);
  EXPECT_EQ(count_value(a.solution, kBlack), 3 * 13);
  EXPECT_GT(count_value(a.solution, kWhite), 0);
  for (auto v : a.solution.data()) EXPECT_TRUE(v == kBlack || v == kGray || v == kWhite);
  // Corners stay background.
  EXPECT_EQ(a.solution.at(0, 0), kGray);
  EXPECT_EQ(a.solution.at(127, 127), kGray);
}

TEST(Raster, PolygonPairInteriorArea) {
  const std::vector<Point> pts{{0.1, 0.1}, {0.9, 0.2}, {0.8, 0.9}, {0.2, 0.7}};
  const SimplePolygon poly{pts};
  const auto pair = rasterize_polygon_pair(pts, poly);
  const double s = 128.0;
  const double expected = shoelace_area(poly) * s * s;
  const int inside = count_value(pair.solution, kBlack) + count_value(pair.solution, kWhite);
  EXPECT_NEAR(inside, expected, expected * 0.04);
  EXPECT_EQ(pair.solution.at(0, 0), kGray);
  EXPECT_EQ(count_value(pair.condition, kBlack), 4 * 13);
}

TEST(Image, PngRoundTrip) {
  Rng rng(3);
  GrayImage img(37);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const auto dir = std::filesystem::temp_directory_path() / "geopix_png_test";
  std::filesystem::create_directories(dir);
  write_png(dir / "a.png", img);
  EXPECT_EQ(read_png(dir / "a.png"), img);
  const auto bytes = encode_png(img);
  EXPECT_EQ(bytes, encode_png(img));
  EXPECT_GT(bytes.size(), 8u);
  std::filesystem::remove_all(dir);
}

TEST(Image, WorldToPixelInverse) {
  const auto m = point_task_map(128);
  EXPECT_EQ(m.apply({0, 1}), (Point{0, 0}));
  EXPECT_EQ(m.apply({1, 0}), (Point{128, 128}));
  const Point p{0.37, 0.61};
  EXPECT_NEAR(distance(m.inverse(m.apply(p)), p), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.scale(), 128.0);
}

TEST(ImgProc, ComponentsAndContour) {
  GrayImage img(20, 0);
  for (int r = 2; r < 8; ++r)
    for (int c = 3; c < 10; ++c) img.at(c, r) = 255;
  img.at(15, 15) = 255;
  img.at(16, 16) = 255;  // diagonal neighbour joins under 8-connectivity
  BinaryMask m(img, [](std::uint8_t v) { return v >= 128; });
  const auto comps = connected_components(m);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(comps[0].pixels.size(), 42u);
  EXPECT_EQ(comps[1].pixels.size(), 2u);
  EXPECT_EQ(largest_component(comps), &comps[0]);
  EXPECT_EQ(comps[0].centroid(), (Point{6.5, 5.0}));

  const auto contour = trace_outer_contour(comps[0]);
  // Perimeter pixels of a 7x6 block, each visited once.
  EXPECT_EQ(contour.size(), 2u * 7 + 2u * 6 - 4);
  std::set<std::pair<int, int>> uniq;
  for (auto p : contour) uniq.insert({p.col, p.row});
  EXPECT_EQ(uniq.size(), contour.size());
  const auto pts = contour_centers(contour);
  EXPECT_DOUBLE_EQ(std::abs(signed_area(pts)), 6.0 * 5.0);

  EXPECT_EQ(trace_outer_contour(comps[1]).size(), 2u);
}

TEST(ImgProc, ContourOfRasterizedDiskIsClosedLoop) {
  GrayImage img(40, 0);
  std::vector<Point> poly;
  for (int i = 0; i < 64; ++i) poly.push_back({20 + 12 * std::cos(kTwoPi * i / 64), 20 + 12 * std::sin(kTwoPi * i / 64)});
  fill_polygon(img, poly, 255);
  BinaryMask m(img, [](std::uint8_t v) { return v >= 128; });
  const auto comps = connected_components(m);
  ASSERT_EQ(comps.size(), 1u);
  const auto contour = trace_outer_contour(comps[0]);
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const auto a = contour[i], b = contour[(i + 1) % contour.size()];
    EXPECT_LE(std::max(std::abs(a.col - b.col), std::abs(a.row - b.row)), 1);
  }
  EXPECT_NEAR(std::abs(signed_area(contour_centers(contour))), kPi * 144, kPi * 144 * 0.1);
}
