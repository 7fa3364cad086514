#include "duotrack/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "duotrack/errors.hpp"

namespace duotrack {

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

std::vector<Point> positively_oriented(const Polygon& p) {
  std::vector<Point> v = p.vertices;
  if (signed_area(v) < 0.0) std::reverse(v.begin(), v.end());
  return v;
}

double wrap_half_turn(double angle) {
  // Rectangles are symmetric under a half turn; fold into [-pi/2, pi/2).
  constexpr double pi = std::numbers::pi;
  while (angle >= pi / 2) angle -= pi;
  while (angle < -pi / 2) angle += pi;
  return angle;
}

}  // namespace

std::array<Point, 4> RotatedBox::corners() const {
  double c = std::cos(angle);
  double s = std::sin(angle);
  // cos(-pi/2) is not exactly 0; keep upright boxes exact.
  if (angle == -std::numbers::pi / 2) {
    c = 0.0;
    s = -1.0;
  }
  const double hw = 0.5 * width;
  const double hh = 0.5 * height;
  // u = (c, s) along the width, v = (-s, c) along the height.
  return {{{center.x - c * hw + s * hh, center.y - s * hw - c * hh},
           {center.x + c * hw + s * hh, center.y + s * hw - c * hh},
           {center.x + c * hw - s * hh, center.y + s * hw + c * hh},
           {center.x - c * hw - s * hh, center.y - s * hw + c * hh}}};
}

Polygon RotatedBox::to_polygon() const {
  const auto c = corners();
  return Polygon{{c.begin(), c.end()}};
}

double signed_area(std::span<const Point> v) {
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return 0.5 * twice;
}

double polygon_area(const Polygon& p) { return std::abs(signed_area(p.vertices)); }

bool is_convex(const Polygon& p) {
  const auto& v = p.vertices;
  if (v.size() < 3) return false;
  int sign = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = cross(v[i], v[(i + 1) % v.size()], v[(i + 2) % v.size()]);
    if (c == 0.0) continue;
    const int s = c > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) return false;
    sign = s;
  }
  return sign != 0;
}

std::vector<Point> mask_to_points(const Mask& m) {
  std::vector<Point> points;
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      if (!m.at(r, c)) continue;
      for (int dy = 0; dy <= 1; ++dy) {
        for (int dx = 0; dx <= 1; ++dx) points.push_back({double(c + dx), double(r + dy)});
      }
    }
  }
  if (points.empty()) throw DegenerateRegionError("mask_to_points: empty mask");
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

Polygon convex_hull(std::span<const Point> input) {
  std::vector<Point> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) throw DegenerateRegionError("convex_hull: fewer than 3 distinct points");

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw DegenerateRegionError("convex_hull: all points collinear");
  return Polygon{std::move(hull)};
}

RotatedBox min_area_rect(std::span<const Point> points) {
  const Polygon hull = convex_hull(points);
  const auto& h = hull.vertices;

  double best_area = std::numeric_limits<double>::infinity();
  RotatedBox best;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Point a = h[i];
    const Point b = h[(i + 1) % h.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const double ux = (b.x - a.x) / len;
    const double uy = (b.y - a.y) / len;
    double u_lo = std::numeric_limits<double>::infinity(), u_hi = -u_lo;
    double v_lo = u_lo, v_hi = -u_lo;
    for (const auto& p : h) {
      const double pu = p.x * ux + p.y * uy;
      const double pv = -p.x * uy + p.y * ux;
      u_lo = std::min(u_lo, pu);
      u_hi = std::max(u_hi, pu);
      v_lo = std::min(v_lo, pv);
      v_hi = std::max(v_hi, pv);
    }
    const double area = (u_hi - u_lo) * (v_hi - v_lo);
    if (area < best_area) {
      best_area = area;
      const double cu = 0.5 * (u_lo + u_hi);
      const double cv = 0.5 * (v_lo + v_hi);
      best.center = {cu * ux - cv * uy, cu * uy + cv * ux};
      best.width = u_hi - u_lo;
      best.height = v_hi - v_lo;
      best.angle = std::atan2(uy, ux);
    }
  }
  if (!(best_area > 0.0)) throw DegenerateRegionError("min_area_rect: zero-area hull");

  if (best.width < best.height) {
    std::swap(best.width, best.height);
    best.angle += std::numbers::pi / 2;
  }
  best.angle = wrap_half_turn(best.angle);
  if (best.width - best.height <= 1e-12 * best.width) {
    // Squares are also symmetric under a quarter turn.
    constexpr double quarter = std::numbers::pi / 2;
    while (best.angle >= quarter / 2) best.angle -= quarter;
    while (best.angle < -quarter / 2) best.angle += quarter;
  }
  return best;
}

double iou_axis(const AxisBox& a, const AxisBox& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  std::vector<Point> out = subject.vertices;
  const auto& c = clip.vertices;
  for (std::size_t e = 0; e < c.size() && !out.empty(); ++e) {
    const Point e1 = c[e];
    const Point e2 = c[(e + 1) % c.size()];
    std::vector<Point> in;
    in.swap(out);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Point p = in[i];
      const Point q = in[(i + 1) % in.size()];
      const double dp = cross(e1, e2, p);
      const double dq = cross(e1, e2, q);
      if (dp >= 0.0) out.push_back(p);
      if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
  }
  return Polygon{std::move(out)};
}

double iou_polygon(const Polygon& a, const Polygon& b) {
  if (!is_convex(a) || !is_convex(b)) throw ArgumentError("iou_polygon: non-convex polygon");
  const Polygon pa{positively_oriented(a)};
  const Polygon pb{positively_oriented(b)};
  const double area_a = signed_area(pa.vertices);
  const double area_b = signed_area(pb.vertices);
  const Polygon inter = clip_convex(pa, pb);
  const double area_i = inter.vertices.size() < 3 ? 0.0 : std::abs(signed_area(inter.vertices));
  const double uni = area_a + area_b - area_i;
  if (uni <= 0.0 || area_i <= 0.0) return 0.0;
  return std::clamp(area_i / uni, 0.0, 1.0);
}

AxisBox polygon_to_axis(const Polygon& p) {
  if (p.vertices.empty()) throw DegenerateRegionError("polygon_to_axis: no vertices");
  AxisBox box{p.vertices[0].x, p.vertices[0].y, p.vertices[0].x, p.vertices[0].y};
  for (const auto& v : p.vertices) {
    box.x0 = std::min(box.x0, v.x);
    box.y0 = std::min(box.y0, v.y);
    box.x1 = std::max(box.x1, v.x);
    box.y1 = std::max(box.y1, v.y);
  }
  return box;
}

Polygon axis_to_polygon(const AxisBox& b) {
  return Polygon{{{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}};
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_xywh(const AxisBox& b) {
  return format_real(b.x0) + "," + format_real(b.y0) + "," + format_real(b.width()) + "," +
         format_real(b.height());
}

std::string format_polygon(const Polygon& p) {
  std::string out;
  for (std::size_t i = 0; i < p.vertices.size(); ++i) {
    if (i) out += ',';
    out += format_real(p.vertices[i].x);
    out += ',';
    out += format_real(p.vertices[i].y);
  }
  return out;
}

std::vector<double> parse_reals(std::string_view line) {
  std::vector<double> values;
  std::size_t pos = 0;
  auto is_sep = [](char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r'; };
  while (pos < line.size()) {
    while (pos < line.size() && is_sep(line[pos])) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !is_sep(line[end])) ++end;
    double v = 0.0;
    const char* first = line.data() + pos;
    const char* last = line.data() + end;
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
      throw FormatError("malformed number '" + std::string(line.substr(pos, end - pos)) + "'");
    }
    values.push_back(v);
    pos = end;
  }
  return values;
}

Polygon parse_region(std::string_view line) {
  const auto v = parse_reals(line);
  if (v.size() == 4) {
    if (!(v[2] > 0.0 && v[3] > 0.0)) throw FormatError("region with non-positive width/height");
    return axis_to_polygon({v[0], v[1], v[0] + v[2], v[1] + v[3]});
  }
  if (v.size() == 8) {
    return Polygon{{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}}};
  }
  throw FormatError("region needs 4 or 8 numbers, got " + std::to_string(v.size()));
}

AxisBox parse_xywh(std::string_view line) {
  const auto v = parse_reals(line);
  if (v.size() != 4) throw FormatError("x,y,w,h region needs 4 numbers, got " + std::to_string(v.size()));
  if (!(v[2] > 0.0 && v[3] > 0.0)) throw FormatError("region with non-positive width/height");
  return {v[0], v[1], v[0] + v[2], v[1] + v[3]};
}

}  // namespace duotrack
