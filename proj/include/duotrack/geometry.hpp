#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "duotrack/mask.hpp"

namespace duotrack {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

/// Axis-aligned box with top-left (x0, y0) and bottom-right (x1, y1).
struct AxisBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool valid() const { return x0 < x1 && y0 < y1; }

  static AxisBox from_center(Point c, double w, double h) {
    return {c.x - 0.5 * w, c.y - 0.5 * h, c.x + 0.5 * w, c.y + 0.5 * h};
  }

  friend bool operator==(const AxisBox&, const AxisBox&) = default;
};

/// Vertices in order; producers in this library emit positive shoelace area.
struct Polygon {
  std::vector<Point> vertices;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Oriented rectangle. After canonicalisation width >= height and the angle
/// (direction of the width side, radians) lies in [-pi/2, pi/2).
struct RotatedBox {
  Point center;
  double width = 0.0;
  double height = 0.0;
  double angle = 0.0;

  double area() const { return width * height; }
  std::array<Point, 4> corners() const;
  Polygon to_polygon() const;
};

double signed_area(std::span<const Point> vertices);
double polygon_area(const Polygon& p);
bool is_convex(const Polygon& p);

/// Corners of every foreground pixel's unit square [c, c+1] x [r, r+1],
/// deduplicated and sorted.
std::vector<Point> mask_to_points(const Mask& m);

/// Monotone-chain hull, positive orientation, collinear points dropped.
Polygon convex_hull(std::span<const Point> points);

/// Minimum-area enclosing rectangle. Some optimal rectangle has a side
/// collinear with a hull edge, so only hull-edge orientations are tried.
RotatedBox min_area_rect(std::span<const Point> points);

double iou_axis(const AxisBox& a, const AxisBox& b);

/// Sutherland-Hodgman clip of `subject` against the convex `clip` polygon.
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

/// Overlap of two convex polygons (either orientation accepted).
double iou_polygon(const Polygon& a, const Polygon& b);

AxisBox polygon_to_axis(const Polygon& p);
Polygon axis_to_polygon(const AxisBox& b);

// Region text forms: "x,y,w,h" for axis boxes and "x1,y1,...,x4,y4" for
// four-vertex polygons. Numbers are written in shortest round-trip form.
std::string format_xywh(const AxisBox& b);
std::string format_polygon(const Polygon& p);
std::string format_real(double v);
std::vector<double> parse_reals(std::string_view line);
/// Accepts 8 reals (polygon) or 4 reals (x,y,w,h, promoted to a rectangle).
Polygon parse_region(std::string_view line);
AxisBox parse_xywh(std::string_view line);

}  // namespace duotrack
