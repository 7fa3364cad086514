#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "duotrack/errors.hpp"
#include "duotrack/geometry.hpp"
#include "oracles.hpp"

using namespace duotrack;

namespace {

constexpr double kPi = std::numbers::pi;

Polygon square(double x0, double y0, double side) { return axis_to_polygon({x0, y0, x0 + side, y0 + side}); }

Polygon rotate(const Polygon& p, Point c, double theta) {
  Polygon out;
  for (const auto& v : p.vertices) {
    const double dx = v.x - c.x, dy = v.y - c.y;
    out.vertices.push_back({c.x + dx * std::cos(theta) - dy * std::sin(theta),
                            c.y + dx * std::sin(theta) + dy * std::cos(theta)});
  }
  return out;
}

std::vector<Point> random_points(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
  return pts;
}

// True when p lies inside or on the rectangle, allowing `slack`.
bool rect_contains(const RotatedBox& r, Point p, double slack) {
  const double c = std::cos(r.angle), s = std::sin(r.angle);
  const double dx = p.x - r.center.x, dy = p.y - r.center.y;
  const double u = dx * c + dy * s, v = -dx * s + dy * c;
  return std::abs(u) <= 0.5 * r.width + slack && std::abs(v) <= 0.5 * r.height + slack;
}

Polygon random_convex(std::mt19937_64& rng) {
  return convex_hull(random_points(rng, 12, 0.0, 10.0));
}

}  // namespace

TEST(MaskToPoints, Examples) {
  Mask one(3, 3);
  one.at(0, 0) = 1;
  EXPECT_EQ(mask_to_points(one), (std::vector<Point>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));

  Mask block(4, 4);
  block.at(1, 1) = block.at(1, 2) = block.at(2, 1) = block.at(2, 2) = 1;
  EXPECT_EQ(mask_to_points(block).size(), 9u);

  EXPECT_THROW(mask_to_points(Mask(3, 3)), DegenerateRegionError);
}

TEST(MaskToPoints, AtMostFourCornersPerPixel) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    Mask m(12, 9);
    for (auto& b : m.bits) b = coin(rng);
    if (m.empty()) continue;
    EXPECT_LE(mask_to_points(m).size(), 4 * m.count());
  }
}

TEST(ConvexHull, Examples) {
  const std::vector<Point> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  Polygon h = convex_hull(sq);
  EXPECT_EQ(h.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(signed_area(h.vertices), 4.0);

  std::vector<Point> with_centre = sq;
  with_centre.push_back({1, 1});
  with_centre.push_back({1, 0});  // collinear on an edge
  h = convex_hull(with_centre);
  EXPECT_EQ(h.vertices.size(), 4u);
  for (const auto& v : h.vertices) EXPECT_NE(v, (Point{1, 1}));

  const std::vector<Point> line{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(convex_hull(line), DegenerateRegionError);
  EXPECT_THROW(convex_hull(std::vector<Point>{{0, 0}, {1, 0}}), DegenerateRegionError);
}

TEST(ConvexHull, ContainsEveryInputPoint) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = random_points(rng, 100, -50.0, 50.0);
    const Polygon h = convex_hull(pts);
    EXPECT_GT(signed_area(h.vertices), 0.0);
    EXPECT_TRUE(is_convex(h));
    const auto& v = h.vertices;
    for (const auto& p : pts) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point a = v[i], b = v[(i + 1) % v.size()];
        const double cr = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        EXPECT_GE(cr, -1e-9);
      }
    }
  }
}

TEST(MinAreaRect, AxisAlignedBlock) {
  Mask m(10, 12);
  for (int r = 2; r <= 5; ++r)
    for (int c = 3; c <= 9; ++c) m.at(r, c) = 1;
  const RotatedBox r = min_area_rect(mask_to_points(m));
  EXPECT_EQ(r.width, 7.0);
  EXPECT_EQ(r.height, 4.0);
  EXPECT_EQ(r.angle, 0.0);
  EXPECT_EQ(polygon_to_axis(r.to_polygon()), (AxisBox{3, 2, 10, 6}));
}

TEST(MinAreaRect, UprightBlockCanonicalisesWidthFirst) {
  Mask m(12, 6);
  for (int r = 1; r <= 9; ++r)
    for (int c = 2; c <= 4; ++c) m.at(r, c) = 1;
  const RotatedBox r = min_area_rect(mask_to_points(m));
  EXPECT_EQ(r.width, 9.0);
  EXPECT_EQ(r.height, 3.0);
  EXPECT_EQ(r.angle, -kPi / 2);
  EXPECT_EQ(polygon_to_axis(r.to_polygon()), (AxisBox{2, 1, 5, 10}));
}

TEST(MinAreaRect, SinglePixelIsUnitSquare) {
  Mask m(5, 5);
  m.at(3, 1) = 1;
  const RotatedBox r = min_area_rect(mask_to_points(m));
  EXPECT_DOUBLE_EQ(r.width, 1.0);
  EXPECT_DOUBLE_EQ(r.height, 1.0);
  EXPECT_DOUBLE_EQ(r.center.x, 1.5);
  EXPECT_DOUBLE_EQ(r.center.y, 3.5);
  EXPECT_GE(r.angle, -kPi / 4);
  EXPECT_LT(r.angle, kPi / 4);
}

TEST(MinAreaRect, DiagonalRunMatchesAngleSweep) {
  Mask m(3, 3);
  m.at(0, 0) = m.at(1, 1) = m.at(2, 2) = 1;
  const auto pts = mask_to_points(m);
  const RotatedBox r = min_area_rect(pts);
  const oracle::SweepResult sweep = oracle::sweep_min_area(pts);
  EXPECT_NEAR(r.area(), sweep.refined_area, 1e-6 * sweep.refined_area);
  EXPECT_LE(r.area(), sweep.coarse_area * (1 + 1e-12));
  EXPECT_NEAR(std::abs(r.angle), kPi / 4, 1e-12);
}

TEST(MinAreaRect, NeverLargerThanSweepAndContainsAllPoints) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = random_points(rng, 30, 0.0, 20.0);
    const RotatedBox r = min_area_rect(pts);
    const auto sweep = oracle::sweep_min_area(pts);
    EXPECT_LE(r.area(), sweep.coarse_area * (1 + 1e-12));
    EXPECT_NEAR(r.area(), sweep.refined_area, 1e-6 * sweep.refined_area);
    EXPECT_GE(r.width, r.height);
    EXPECT_GE(r.angle, -kPi / 2);
    EXPECT_LT(r.angle, kPi / 2);
    for (const auto& p : pts) EXPECT_TRUE(rect_contains(r, p, 1e-9));
  }
}

TEST(MinAreaRect, RotationConsistent) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = random_points(rng, 25, -10.0, 10.0);
    const double theta = angle(rng);
    std::vector<Point> rotated;
    for (const auto& p : pts) {
      rotated.push_back({p.x * std::cos(theta) - p.y * std::sin(theta), p.x * std::sin(theta) + p.y * std::cos(theta)});
    }
    const RotatedBox a = min_area_rect(pts);
    const RotatedBox b = min_area_rect(rotated);
    EXPECT_NEAR(b.area(), a.area(), 1e-6 * a.area());
    // angle difference equals theta modulo a quarter turn
    const double d = b.angle - a.angle - theta;
    EXPECT_NEAR(std::cos(4 * d), 1.0, 1e-9);
  }
}

TEST(MinAreaRect, CollinearPointsThrow) {
  const std::vector<Point> line{{0, 0}, {1, 2}, {2, 4}};
  EXPECT_THROW(min_area_rect(line), DegenerateRegionError);
}

TEST(IouAxis, Examples) {
  const AxisBox a{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(iou_axis(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou_axis(a, {2, 2, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(iou_axis(a, {0.5, 0, 1.5, 1}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou_axis(a, {1, 0, 2, 1}), 0.0);
}

TEST(IouPolygon, Examples) {
  const Polygon sq = square(0, 0, 1);
  EXPECT_DOUBLE_EQ(iou_polygon(sq, sq), 1.0);
  EXPECT_DOUBLE_EQ(iou_polygon(sq, square(3, 3, 1)), 0.0);
  // clockwise input accepted
  Polygon cw = sq;
  std::reverse(cw.vertices.begin(), cw.vertices.end());
  EXPECT_DOUBLE_EQ(iou_polygon(cw, sq), 1.0);
}

TEST(IouPolygon, AgreesWithAxisIouOnRectangles) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0), s(0.5, 6.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double ax = u(rng), ay = u(rng), bx = u(rng), by = u(rng);
    const AxisBox a{ax, ay, ax + s(rng), ay + s(rng)};
    const AxisBox b{bx, by, bx + s(rng), by + s(rng)};
    EXPECT_NEAR(iou_polygon(axis_to_polygon(a), axis_to_polygon(b)), iou_axis(a, b), 1e-9);
  }
}

TEST(IouPolygon, RotatedSquareMatchesMonteCarlo) {
  const Polygon sq = square(0, 0, 1);
  const Polygon rot = rotate(sq, {0.5, 0.5}, kPi / 4);
  const double mc = oracle::iou_monte_carlo(sq, rot, 1'000'000, 123);
  EXPECT_NEAR(iou_polygon(sq, rot), mc, 2e-3);
  // Closed form: the octagon has area 2(sqrt 2 - 1).
  const double inter = 2.0 * (std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(iou_polygon(sq, rot), inter / (2.0 - inter), 1e-12);
}

TEST(IouPolygon, SymmetricBoundedAndZeroWhenDisjoint) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Polygon a = random_convex(rng);
    const Polygon b = random_convex(rng);
    const double ab = iou_polygon(a, b);
    EXPECT_NEAR(ab, iou_polygon(b, a), 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(iou_polygon(a, a), 1.0, 1e-12);
    Polygon far = a;
    for (auto& v : far.vertices) v.x += 100.0;
    EXPECT_EQ(iou_polygon(a, far), 0.0);
  }
}

TEST(IouPolygon, NonConvexIsArgumentError) {
  const Polygon arrow{{{0, 0}, {4, 0}, {2, 1}, {4, 4}, {0, 4}}};
  EXPECT_THROW(iou_polygon(arrow, square(0, 0, 1)), ArgumentError);
}

TEST(PolygonToAxis, Examples) {
  const AxisBox b{1, 2, 5, 7};
  EXPECT_EQ(polygon_to_axis(axis_to_polygon(b)), b);
  const AxisBox r = polygon_to_axis(rotate(square(0, 0, 1), {0.5, 0.5}, kPi / 4));
  EXPECT_NEAR(r.width(), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.height(), std::sqrt(2.0), 1e-12);
  EXPECT_THROW(polygon_to_axis(Polygon{}), DegenerateRegionError);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Polygon p = random_convex(rng);
    const AxisBox box = polygon_to_axis(p);
    for (const auto& v : p.vertices) {
      EXPECT_GE(v.x, box.x0);
      EXPECT_LE(v.x, box.x1);
      EXPECT_GE(v.y, box.y0);
      EXPECT_LE(v.y, box.y1);
    }
  }
}

TEST(RegionText, ParseAndFormat) {
  EXPECT_EQ(parse_region("10,20,30,40"), axis_to_polygon({10, 20, 40, 60}));
  EXPECT_EQ(parse_region("1,2,3,4,5,6,7,8").vertices.size(), 4u);
  EXPECT_EQ(parse_region("1.5 2.5\t3,4"), axis_to_polygon({1.5, 2.5, 4.5, 6.5}));
  EXPECT_THROW(parse_region("1,2,3"), FormatError);
  EXPECT_THROW(parse_region("1,2,0,4"), FormatError);
  EXPECT_THROW(parse_region("1,2,x,4"), FormatError);
  EXPECT_THROW(parse_region("1,2,nan,4"), FormatError);
  EXPECT_EQ(parse_xywh("1,2,3,4"), (AxisBox{1, 2, 4, 6}));
  EXPECT_EQ(format_xywh({1, 2, 4, 6.5}), "1,2,3,4.5");
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_polygon(axis_to_polygon({0, 0, 1, 2})), "0,0,1,0,1,2,0,2");
}

TEST(RegionText, ShortestFormRoundTripsExactly) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int trial = 0; trial < 1000; ++trial) {
    Polygon p;
    for (int i = 0; i < 4; ++i) p.vertices.push_back({u(rng), u(rng)});
    EXPECT_EQ(parse_region(format_polygon(p)), p);
  }
}

TEST(RotatedBox, CornersFormPositiveRectangle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(-kPi / 2, kPi / 2), s(0.5, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const RotatedBox r{{3, 4}, s(rng), s(rng), a(rng)};
    const Polygon p = r.to_polygon();
    EXPECT_NEAR(signed_area(p.vertices), r.area(), 1e-9 * r.area());
    EXPECT_TRUE(is_convex(p));
  }
}
