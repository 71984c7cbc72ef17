#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "geopix/extract.hpp"
#include "geopix/rng.hpp"

using namespace geopix;

namespace {

GrayImage block(int size, int c0, int r0, int w, int h) {
  GrayImage img(size, 0);
  for (int r = r0; r < r0 + h; ++r) {
    for (int c = c0; c < c0 + w; ++c) img.at(c, r) = 255;
  }
  return img;
}

Quad square_at(Point lo, double side) {
  return Quad{{lo, lo + Point{side, 0}, lo + Point{side, side}, lo + Point{0, side}}};
}

Polyline outline(const Quad& q) { return make_polyline({q.vertices.begin(), q.vertices.end()}, true); }

// Steiner-style drawing in pixel coordinates.
GrayImage draw_graph(const std::vector<Point>& vs, const std::vector<std::pair<int, int>>& es) {
  GrayImage img(128, kSteinerPalette.background);
  for (auto [a, b] : es) draw_line(img, to_pixel(vs[a]), to_pixel(vs[b]), kSteinerPalette.edge, kSteinerEdgeWidth);
  for (const Point& p : vs) draw_disk(img, to_pixel(p), kNodeRadius, kSteinerPalette.node);
  return img;
}

// Polygon-style drawing of a vertex cycle, pixel coordinates.
GrayImage draw_polygon(const std::vector<Point>& vs) {
  GrayImage img(128, kPolygonPalette.background);
  fill_polygon(img, vs, kPolygonPalette.fill);
  draw_closed_polyline(img, vs, kPolygonPalette.edge);
  return img;
}

bool has_edge_between(const PlaneGraph& g, Point a, Point b) {
  for (const auto& e : g.edges) {
    const Point p = g.vertices[e.first], q = g.vertices[e.second];
    if ((distance(p, a) < 1 && distance(q, b) < 1) || (distance(p, b) < 1 && distance(q, a) < 1)) return true;
  }
  return false;
}

}  // namespace

TEST(ExtractSquare, AxisAlignedBlock) {
  const Quad q = extract_square(block(64, 10, 10, 40, 40));
  for (const Point& v : q.vertices) {
    EXPECT_TRUE(std::abs(v.x - 10.5) < 1e-9 || std::abs(v.x - 49.5) < 1e-9);
    EXPECT_TRUE(std::abs(v.y - 10.5) < 1e-9 || std::abs(v.y - 49.5) < 1e-9);
  }
  EXPECT_NEAR(q.area(), 39.0 * 39.0, 1e-9);
}

TEST(ExtractSquare, RotatedBlock) {
  const double angle = kPi / 6;
  std::vector<Point> poly;
  for (const Point& v : square_at({40, 40}, 50).vertices) poly.push_back(rotate_about(v, {65, 65}, angle));
  GrayImage img(128, 0);
  fill_polygon(img, poly, 255);
  const Quad q = extract_square(img);
  const Point side = q.vertices[1] - q.vertices[0];
  double a = std::fmod(std::atan2(side.y, side.x) + 4 * kTwoPi, kPi / 2);
  a = std::min(a, kPi / 2 - a);
  EXPECT_NEAR(std::min(std::abs(a - angle), std::abs(a - (kPi / 2 - angle))), 0.0, 2.0 * kPi / 180);
  EXPECT_NEAR(std::sqrt(q.area()), 50.0, 2.0);
}

TEST(ExtractSquare, IgnoresSpeck) {
  GrayImage img = block(64, 20, 20, 16, 16);
  img.at(3, 3) = 255;
  const Quad q = extract_square(img);
  for (const Point& v : q.vertices) {
    EXPECT_GE(v.x, 20.0);
    EXPECT_GE(v.y, 20.0);
  }
}

TEST(ExtractSquare, EmptyMaskFails) { EXPECT_THROW(extract_square(GrayImage(32, 0)), ExtractionFailure); }

TEST(Snap, RecoversIntegerOffset) {
  const Quad truth = square_at({20, 20}, 40);
  Quad off = truth;
  for (auto& v : off.vertices) v = v + Point{2, -1};
  const auto r = snap_square_detailed(off, outline(truth));
  EXPECT_EQ(r.translation, (Point{-2, 1}));
  EXPECT_NEAR(r.score, 0.0, 1e-9);
}

TEST(Snap, RecoversRotation) {
  const Quad truth = square_at({30, 30}, 50);
  Quad off;
  for (int i = 0; i < 4; ++i) off.vertices[i] = rotate_about(truth.vertices[i], truth.center(), 0.05);
  const auto r = snap_square_detailed(off, outline(truth));
  EXPECT_NEAR(r.theta, -0.05, 1e-9);
  EXPECT_NEAR(r.score, 0.0, 1e-6);
}

TEST(Snap, NeverDecreasesAlignment) {
  Rng rng(11);
  const Quad truth = square_at({30, 30}, 60);
  const Polyline curve = outline(truth);
  for (int i = 0; i < 50; ++i) {
    Quad q;
    const double t = rng.uniform(-0.3, 0.3);
    const Point shift{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)};
    for (int k = 0; k < 4; ++k) q.vertices[k] = rotate_about(truth.vertices[k], truth.center(), t) + shift;
    EXPECT_GE(alignment_score(snap_square(q, curve), curve), alignment_score(q, curve));
  }
}

TEST(Snap, IdentityKeptOnTies) {
  const Quad q = square_at({10, 10}, 20);
  Polyline far = make_polyline({{200, 200}, {300, 200}}, false);
  const auto r = snap_square_detailed(q, far, SnapParams{0.0, 0.0, 0.01, 0});
  EXPECT_EQ(r.quad, q);
  EXPECT_THROW(snap_square(q, far, SnapParams{0.0, 0.1, 0.0, 1}), InvalidInput);
}

TEST(DetectNodes, SnapsToTerminalsAndKeepsSteinerPoints) {
  const std::vector<Point> terminals{{20.5, 20.5}, {100.5, 20.5}, {60.5, 100.5}};
  const Point steiner{60.5, 45.5};
  const auto img = draw_graph({terminals[0], terminals[1], terminals[2], steiner}, {{0, 3}, {1, 3}, {2, 3}});
  const auto nodes = detect_nodes(img, {{21.4, 19.9}, {99.0, 21.0}, {61.0, 102.0}});
  ASSERT_EQ(nodes.size(), 4u);
  int snapped = 0;
  for (const auto& n : nodes) {
    if (n.terminal) {
      ++snapped;
    } else {
      EXPECT_LT(distance(n.position, steiner), 1.0);
    }
  }
  EXPECT_EQ(snapped, 3);
}

TEST(DetectNodes, MergesDuplicateSnaps) {
  GrayImage img(64, kSteinerPalette.background);
  draw_disk(img, {20, 20}, 1, kBlack);
  draw_disk(img, {24, 20}, 1, kBlack);
  const auto nodes = detect_nodes(img, {{22.5, 20.5}});
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes[0].terminal, 0u);
}

TEST(ExtractGraph, SingleEdge) {
  const std::vector<Point> vs{{20.5, 30.5}, {90.5, 70.5}};
  const auto img = draw_graph(vs, {{0, 1}});
  const auto g = extract_graph(img, detect_nodes(img, vs));
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_TRUE(has_edge_between(g, vs[0], vs[1]));
}

TEST(ExtractGraph, CollinearChainKeepsShortEdges) {
  const std::vector<Point> vs{{20.5, 60.5}, {60.5, 60.5}, {100.5, 60.5}};
  const auto img = draw_graph(vs, {{0, 1}, {1, 2}});
  const auto g = extract_graph(img, detect_nodes(img, vs));
  EXPECT_EQ(g.edges.size(), 2u);
  EXPECT_FALSE(has_edge_between(g, vs[0], vs[2]));
}

TEST(ExtractGraph, ThinTriangleShortcutDropped) {
  // a-c and c-b meet at a wide obtuse angle at c; the chord a-b hugs both
  // strokes but is not collinear with either at its ends.
  const std::vector<Point> vs{{39.5, 47.5}, {80.5, 49.5}, {67.32, 45.33}};
  const auto img = draw_graph(vs, {{0, 2}, {2, 1}});
  const ExtractionThresholds th;
  ASSERT_GT(angle_between(vs[2] - vs[0], vs[1] - vs[0]), th.collinear_angle);
  ASSERT_GT(*detail::line_support(img, vs[0], vs[1], th), th.edge_fraction);
  const auto g = extract_graph(img, detect_nodes(img, vs));
  EXPECT_EQ(g.edges.size(), 2u);
  EXPECT_TRUE(has_edge_between(g, vs[0], vs[2]));
  EXPECT_TRUE(has_edge_between(g, vs[2], vs[1]));
}

TEST(ExtractGraph, ShortcutAlongTwoStrokesDropped) {
  // Terminals 3 and 2 are joined through two Steiner points; the straight
  // chord 3-2 crosses their strokes and passes the dilated support test.
  const std::vector<Point> vs{{14.4125, 81.1392}, {5.03758, 60.5554}, {30.4358, 91.1258},
                              {31.7229, 64.0309}, {100.092, 95.9309}, {54.3286, 75.1083},
                              {80.6288, 78.5864}, {27.077, 82.8816},  {35.1617, 72.4714}};
  const std::vector<std::pair<int, int>> es{{4, 6}, {5, 6}, {0, 7}, {2, 7}, {3, 8}, {7, 8}, {5, 8}, {0, 1}};
  const auto img = draw_graph(vs, es);
  const ExtractionThresholds th;
  ASSERT_GT(*detail::line_support(img, vs[3], vs[2], th), th.edge_fraction);
  const auto g = extract_graph(img, detect_nodes(img, vs));
  EXPECT_EQ(g.edges.size(), es.size());
  EXPECT_FALSE(has_edge_between(g, vs[3], vs[2]));
  for (auto [a, b] : es) EXPECT_TRUE(has_edge_between(g, vs[a], vs[b])) << a << "-" << b;
}

TEST(ExtractGraph, DrawnTriangleKept) {
  const std::vector<Point> vs{{20.5, 20.5}, {100.5, 30.5}, {50.5, 100.5}};
  const auto img = draw_graph(vs, {{0, 1}, {1, 2}, {2, 0}});
  EXPECT_EQ(extract_graph(img, detect_nodes(img, vs)).edges.size(), 3u);
}

TEST(ExtractGraph, NoEdgesOnBlankCanvas) {
  const std::vector<Point> vs{{20.5, 20.5}, {100.5, 30.5}, {50.5, 100.5}};
  const auto img = draw_graph(vs, {});
  EXPECT_TRUE(extract_graph(img, detect_nodes(img, vs)).edges.empty());
}

TEST(ExtractPolygon, RecoversCycle) {
  const std::vector<Point> vs{{20.5, 20.5}, {100.5, 25.5}, {60.5, 60.5}, {105.5, 100.5}, {25.5, 95.5}};
  const auto out = extract_polygon(draw_polygon(vs), vs);
  EXPECT_TRUE(cycles_equal(out.order, {0, 1, 2, 3, 4}));
  EXPECT_TRUE(is_simple_polygon(out.polygon.vertices));
}

TEST(ExtractPolygon, MissingEdgeFails) {
  const std::vector<Point> vs{{20.5, 20.5}, {100.5, 20.5}, {100.5, 100.5}, {20.5, 100.5}};
  GrayImage img(128, kPolygonPalette.background);
  fill_polygon(img, vs, kPolygonPalette.fill);
  for (int i = 0; i < 3; ++i) draw_line(img, to_pixel(vs[i]), to_pixel(vs[i + 1]), kWhite);
  EXPECT_THROW(extract_polygon(img, vs), ExtractionFailure);
}

TEST(ExtractPolygon, ExtraChordIgnored) {
  const std::vector<Point> vs{{20.5, 30.5}, {70.5, 15.5}, {110.5, 60.5}, {80.5, 110.5}, {25.5, 90.5}};
  GrayImage img = draw_polygon(vs);
  draw_line(img, to_pixel(vs[0]), to_pixel(vs[2]), kWhite);
  const auto out = extract_polygon(img, vs);
  EXPECT_TRUE(cycles_equal(out.order, {0, 1, 2, 3, 4}));
}

TEST(ExtractPolygon, CrossingDrawnLinesFail) {
  const std::vector<Point> vs{{20.5, 20.5}, {100.5, 20.5}, {100.5, 100.5}, {20.5, 100.5}};
  GrayImage img = draw_polygon(vs);
  draw_line(img, to_pixel(vs[0]), to_pixel(vs[2]), kWhite);
  draw_line(img, to_pixel(vs[1]), to_pixel(vs[3]), kWhite);
  EXPECT_THROW(extract_polygon(img, vs), ExtractionFailure);
}

TEST(ExtractPolygon, SliverChordsCrossingOnEdgeResolved) {
  // Edges 1-2 and 3-4 run about 1.3 px apart, so the sliver between them is
  // solid white; the chord 1-3 inside it is fully drawn and crosses the true
  // edge 4-5 next to vertex 4.
  const std::vector<Point> vs{{80.6745, 122.438}, {115.893, 108.588}, {78.2848, 72.9293}, {58.554, 51.4383},
                              {108.584, 101.436}, {75.366, 35.518},   {24.7859, 32.9036}, {33.7336, 64.7618},
                              {42.4102, 106.999}, {75.6564, 112.51},  {72.6678, 103.252}};
  const GrayImage img = draw_polygon(vs);
  const ExtractionThresholds th;
  ASSERT_EQ(detail::line_support(img, vs[1], vs[3], th, false), 1.0);
  ASSERT_EQ(detail::line_support(img, vs[4], vs[5], th, false), 1.0);
  ASSERT_EQ(segment_intersect({vs[1], vs[3]}, {vs[4], vs[5]}), IntersectionKind::Proper);
  const auto out = extract_polygon(img, vs, th);
  std::vector<std::size_t> expected(vs.size());
  std::iota(expected.begin(), expected.end(), std::size_t{0});
  EXPECT_TRUE(cycles_equal(out.order, expected));
}

TEST(ExtractPolygon, OutputAlwaysSimple) {
  Rng rng(5);
  int found = 0;
  for (int i = 0; i < 40; ++i) {
    std::vector<Point> vs;
    for (int k = 0; k < 7; ++k) vs.push_back({rng.uniform(8.0, 120.0), rng.uniform(8.0, 120.0)});
    // Arbitrary (possibly self-crossing) closed stroke over random points.
    GrayImage img(128, kPolygonPalette.background);
    draw_closed_polyline(img, vs, kWhite);
    try {
      const auto out = extract_polygon(img, vs);
      ++found;
      EXPECT_TRUE(is_simple_polygon(out.polygon.vertices));
      EXPECT_EQ(out.order.size(), vs.size());
    } catch (const ExtractionFailure&) {
    }
  }
  SUCCEED() << found << " extracted";
}

TEST(Thresholds, Validation) {
  ExtractionThresholds th;
  EXPECT_NO_THROW(th.validate());
  th.edge_fraction = 0.0;
  EXPECT_THROW(th.validate(), InvalidInput);
  th = {};
  th.snap_radius = -1;
  EXPECT_THROW(th.validate(), InvalidInput);
}
