#include <gtest/gtest.h>

#include <cmath>

#include "geopix/maxap.hpp"
#include "geopix/metrics.hpp"

using namespace geopix;

namespace {

std::vector<Point> random_points(Rng& rng, std::size_t n) {
  std::vector<Point> ps(n);
  for (auto& p : ps) p = {rng.uniform(), rng.uniform()};
  return ps;
}

std::vector<Point> cycle_points(std::span<const Point> ps, const std::vector<std::size_t>& order) {
  std::vector<Point> v;
  for (auto i : order) v.push_back(ps[i]);
  return v;
}

}  // namespace

TEST(Maxap, ConvexPositionGivesHull) {
  std::vector<Point> ps;
  for (int i = 0; i < 9; ++i) ps.push_back({std::cos(kTwoPi * i / 9.0), std::sin(kTwoPi * i / 9.0)});
  Rng rng(4);
  rng.shuffle(std::span<Point>(ps));
  const auto r = solve_exact_dfs(ps);
  EXPECT_NEAR(r.area, shoelace_area(convex_hull(ps)), 1e-12);
}

TEST(Maxap, SquareWithCenter) {
  const std::vector<Point> ps{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  EXPECT_DOUBLE_EQ(solve_exact_dfs(ps).area, 0.75);
  EXPECT_DOUBLE_EQ(solve_naive_oracle(ps).area, 0.75);
}

TEST(Maxap, DfsMatchesNaiveOracle) {
  Rng rng(31);
  for (int i = 0; i < 60; ++i) {
    const auto ps = random_points(rng, static_cast<std::size_t>(rng.uniform_int(4, 8)));
    const auto dfs = solve_exact_dfs(ps);
    const auto naive = solve_naive_oracle(ps);
    EXPECT_EQ(dfs.area, naive.area) << i;
    EXPECT_EQ(dfs.order, naive.order) << i;
  }
}

TEST(Maxap, ResultIsSimpleCanonicalAndBelowHull) {
  Rng rng(37);
  for (int i = 0; i < 30; ++i) {
    const auto ps = random_points(rng, static_cast<std::size_t>(rng.uniform_int(5, 11)));
    const auto r = solve_exact_dfs(ps);
    ASSERT_EQ(r.order.size(), ps.size());
    EXPECT_TRUE(is_simple_polygon(r.polygon.vertices));
    EXPECT_EQ(r.order.front(), polygon_anchor(ps));
    EXPECT_GT(signed_area(r.polygon.vertices), 0.0);
    EXPECT_LE(r.area, shoelace_area(convex_hull(ps)) + 1e-12);
    auto sorted = r.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) EXPECT_EQ(sorted[k], k);
  }
}

TEST(Maxap, InvariantUnderPermutation) {
  Rng rng(41);
  for (int i = 0; i < 10; ++i) {
    auto ps = random_points(rng, 8);
    const double area = solve_exact_dfs(ps).area;
    rng.shuffle(std::span<Point>(ps));
    EXPECT_NEAR(solve_exact_dfs(ps).area, area, 1e-12);
  }
}

TEST(Maxap, CanonicalCycle) {
  const std::vector<Point> ps{{1, 1}, {0, 1}, {0, 0}, {1, 0}};
  const auto c = canonical_cycle(ps, {0, 1, 2, 3});
  EXPECT_EQ(c, (std::vector<std::size_t>{2, 3, 0, 1}));
  EXPECT_EQ(canonical_cycle(ps, {3, 2, 1, 0}), c);
}

TEST(Maxap, Errors) {
  Rng rng(3);
  EXPECT_THROW(solve_exact_dfs(random_points(rng, 16)), SizeLimitError);
  EXPECT_THROW(solve_naive_oracle(random_points(rng, 9)), SizeLimitError);
  EXPECT_THROW(solve_exact_dfs(std::vector<Point>{{0, 0}, {1, 1}}), InvalidInput);
  EXPECT_THROW(solve_exact_dfs(std::vector<Point>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), DegenerateGeometry);
  EXPECT_THROW(solve_exact_dfs(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}, {1, 0}}), InvalidInput);
}

TEST(RandomPolygon, SimpleAndDeterministic) {
  Rng rng(43);
  for (int i = 0; i < 50; ++i) {
    const auto ps = random_points(rng, static_cast<std::size_t>(rng.uniform_int(3, 15)));
    const auto r = random_simple_polygon(ps, 77 + i);
    EXPECT_TRUE(is_simple_polygon(cycle_points(ps, r.order)));
    EXPECT_EQ(random_simple_polygon(ps, 77 + i).order, r.order);
  }
}

TEST(RandomPolygon, AreaRatioBand) {
  Rng rng(47);
  std::vector<double> ratios;
  for (int i = 0; i < 100; ++i) {
    const auto ps = random_points(rng, static_cast<std::size_t>(rng.uniform_int(7, 10)));
    ratios.push_back(random_simple_polygon(ps, 900 + i).area / solve_exact_dfs(ps).area);
  }
  const auto m = mean_std(ratios);
  EXPECT_GE(m.mean, 0.63);
  EXPECT_LE(m.mean, 0.88);
  for (double r : ratios) EXPECT_LE(r, 1.0 + 1e-12);
}
