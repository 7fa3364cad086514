#include "duotrack/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "duotrack/errors.hpp"
#include "seeded.hpp"

namespace duotrack {

namespace {

// Same-size correlation: pad the search features so the response grid has
// the search grid's extent.
struct SamePadding {
  int top = 0;
  int left = 0;
};

SamePadding same_padding(const Tensor& tmpl) {
  return {(tmpl.height() - 1) / 2, (tmpl.width() - 1) / 2};
}

Tensor pad_for_same(const Tensor& tmpl, const Tensor& search) {
  const auto p = same_padding(tmpl);
  return pad_zero(search, p.top, tmpl.height() - 1 - p.top, p.left, tmpl.width() - 1 - p.left);
}

}  // namespace

GridSpec GridSpec::centered(int height, int width, int stride) {
  return {height, width, stride, 0.5 * stride, 0.5 * stride};
}

Point cell_to_image(Cell cell, int stride, double offset) {
  return {cell.x * static_cast<double>(stride) + offset, cell.y * static_cast<double>(stride) + offset};
}

Point cell_to_image(Cell cell, const GridSpec& grid) {
  return {cell.x * static_cast<double>(grid.stride) + grid.offset_x,
          cell.y * static_cast<double>(grid.stride) + grid.offset_y};
}

RegressionField::RegressionField(const GridSpec& g) : grid(g) {
  const std::size_t n = static_cast<std::size_t>(g.height) * g.width;
  left.assign(n, 0.0);
  top.assign(n, 0.0);
  right.assign(n, 0.0);
  bottom.assign(n, 0.0);
  positive.assign(n, 0);
}

std::size_t RegressionField::positive_count() const {
  return static_cast<std::size_t>(std::count(positive.begin(), positive.end(), std::uint8_t{1}));
}

RegressionField encode_targets(const AxisBox& gt, const GridSpec& grid) {
  if (!gt.valid()) throw DegenerateRegionError("encode_targets: invalid ground-truth box");
  RegressionField field(grid);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const Point p = cell_to_image({x, y}, grid);
      // Points on the box boundary are negative.
      if (!(p.x > gt.x0 && p.x < gt.x1 && p.y > gt.y0 && p.y < gt.y1)) continue;
      const std::size_t i = field.index({x, y});
      field.left[i] = p.x - gt.x0;
      field.top[i] = p.y - gt.y0;
      field.right[i] = gt.x1 - p.x;
      field.bottom[i] = gt.y1 - p.y;
      field.positive[i] = 1;
    }
  }
  return field;
}

AxisBox decode_box(double cx, double cy, double l, double t, double r, double b) {
  if (l < 0.0 || t < 0.0 || r < 0.0 || b < 0.0) {
    throw DegenerateRegionError("decode_box: negative side distance");
  }
  if (!(l + r > 0.0) || !(t + b > 0.0)) throw DegenerateRegionError("decode_box: degenerate box");
  return {cx - l, cy - t, cx + r, cy + b};
}

RegressionField constant_size_field(const GridSpec& grid, double box_width, double box_height) {
  if (!(box_width > 0.0 && box_height > 0.0)) {
    throw DegenerateRegionError("constant_size_field: non-positive box size");
  }
  RegressionField field(grid);
  std::fill(field.left.begin(), field.left.end(), 0.5 * box_width);
  std::fill(field.right.begin(), field.right.end(), 0.5 * box_width);
  std::fill(field.top.begin(), field.top.end(), 0.5 * box_height);
  std::fill(field.bottom.begin(), field.bottom.end(), 0.5 * box_height);
  std::fill(field.positive.begin(), field.positive.end(), std::uint8_t{1});
  return field;
}

DetectionHead::DetectionHead(HeadConfig config, const BackboneConfig& backbone)
    : config_(config) {
  backbone.validate();
  if (config_.aggregate_layers < 1) throw ConfigError("head aggregate_layers must be >= 1");
  if (config_.window_influence < 0.0 || config_.window_influence > 1.0) {
    throw ConfigError("head window_influence must lie in [0, 1]");
  }
  if (config_.kind != HeadKind::conv) return;
  if (config_.tower_channels < 1) throw ConfigError("head tower_channels must be >= 1");
  detail::SeededUniform rng(config_.seed);
  const int width = config_.tower_channels;
  for (int channels : backbone.stage_channels) {
    StageTowers t;
    t.cls.hidden = detail::seeded_conv(rng, width, channels, 3);
    t.cls.out = detail::seeded_conv(rng, 1, width, 1);
    t.reg.hidden = detail::seeded_conv(rng, width, channels, 3);
    t.reg.out = detail::seeded_conv(rng, 4, width, 1);
    towers_.push_back(std::move(t));
  }
}

std::vector<std::size_t> DetectionHead::used_stages(const FeaturePyramid& template_pyr,
                                                    const FeaturePyramid& search_pyr) const {
  if (template_pyr.stages.empty() || template_pyr.stages.size() != search_pyr.stages.size()) {
    throw ShapeError("detection head: template and search pyramids differ in depth");
  }
  for (std::size_t i = 0; i < template_pyr.stages.size(); ++i) {
    if (template_pyr.stages[i].stride != search_pyr.stages[i].stride) {
      throw ShapeError("detection head: pyramid stride mismatch at stage " + std::to_string(i));
    }
  }
  if (config_.kind == HeadKind::conv && towers_.size() != template_pyr.stages.size()) {
    throw ShapeError("detection head: built for a different backbone layout");
  }
  const std::size_t n = template_pyr.stages.size();
  const std::size_t used = std::min<std::size_t>(config_.aggregate_layers, n);
  std::vector<std::size_t> out;
  for (std::size_t i = n - used; i < n; ++i) out.push_back(i);
  return out;
}

GridSpec DetectionHead::grid(const FeaturePyramid& template_pyr,
                             const FeaturePyramid& search_pyr) const {
  used_stages(template_pyr, search_pyr);
  const Tensor& t = template_pyr.deepest().features;
  const Tensor& s = search_pyr.deepest().features;
  const int stride = search_pyr.deepest().stride;
  GridSpec g;
  g.stride = stride;
  if (config_.kind == HeadKind::corr_peak) {
    g.height = s.height() - t.height() + 1;
    g.width = s.width() - t.width() + 1;
    g.offset_x = 0.5 * stride * t.width();
    g.offset_y = 0.5 * stride * t.height();
  } else {
    const auto p = same_padding(t);
    g.height = s.height();
    g.width = s.width();
    g.offset_x = stride * (0.5 * t.width() - p.left);
    g.offset_y = stride * (0.5 * t.height() - p.top);
  }
  if (g.height <= 0 || g.width <= 0) throw ShapeError("detection head: template larger than search");
  return g;
}

std::vector<Tensor> DetectionHead::conv_outputs(const FeaturePyramid& template_pyr,
                                                const FeaturePyramid& search_pyr,
                                                bool regression) const {
  const auto stages = used_stages(template_pyr, search_pyr);
  const GridSpec g = grid(template_pyr, search_pyr);
  std::vector<Tensor> outputs;
  for (std::size_t i : stages) {
    const Tensor& t = template_pyr.stages[i].features;
    const Tensor& s = search_pyr.stages[i].features;
    const Tensor response = depthwise_correlate(t, pad_for_same(t, s), config_.correlation);
    const Tower& tower = regression ? towers_[i].reg : towers_[i].cls;
    Tensor hidden = relu(conv2d(response, tower.hidden, 1, 1));
    outputs.push_back(resize_nearest(conv2d(hidden, tower.out, 1, 0), g.height, g.width));
  }
  return outputs;
}

Tensor DetectionHead::classify(const FeaturePyramid& template_pyr,
                               const FeaturePyramid& search_pyr) const {
  const GridSpec g = grid(template_pyr, search_pyr);
  Tensor scores;
  if (config_.kind == HeadKind::corr_peak) {
    std::vector<Tensor> responses;
    for (std::size_t i : used_stages(template_pyr, search_pyr)) {
      const Tensor& t = template_pyr.stages[i].features;
      const Tensor& s = search_pyr.stages[i].features;
      Tensor r = config_.correlation == CorrelationMode::raw
                     ? sum_channels(depthwise_correlate(t, s))
                     : cross_correlate(t, s, CorrelationMode::normalized);
      responses.push_back(resize_nearest(r, g.height, g.width));
    }
    scores = min_max_normalize(aggregate_multilayer(responses));
  } else {
    scores = sigmoid(aggregate_multilayer(conv_outputs(template_pyr, search_pyr, false)));
  }
  return apply_cosine_window(scores, config_.window_influence);
}

RegressionField DetectionHead::regress(const FeaturePyramid& template_pyr,
                                       const FeaturePyramid& search_pyr) const {
  if (config_.kind != HeadKind::conv) {
    throw ArgumentError("regress: only the conv head has a regression tower");
  }
  const GridSpec g = grid(template_pyr, search_pyr);
  const Tensor raw = aggregate_multilayer(conv_outputs(template_pyr, search_pyr, true));
  RegressionField field(g);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = field.index({x, y});
      auto dist = [&](int c) { return g.stride * std::exp(std::clamp<double>(raw.at(c, y, x), -10.0, 10.0)); };
      field.left[i] = dist(0);
      field.top[i] = dist(1);
      field.right[i] = dist(2);
      field.bottom[i] = dist(3);
      field.positive[i] = 1;
    }
  }
  return field;
}

Tensor classify(const FeaturePyramid& template_pyr, const FeaturePyramid& search_pyr,
                const DetectionHead& head) {
  return head.classify(template_pyr, search_pyr);
}

Tensor min_max_normalize(const Tensor& response) {
  if (response.empty()) return response;
  const auto [lo, hi] = std::minmax_element(response.data().begin(), response.data().end());
  const double min = *lo;
  const double range = static_cast<double>(*hi) - min;
  Tensor out = response;
  for (float& v : out.data()) {
    v = range > 0.0 ? static_cast<float>(std::clamp((v - min) / range, 0.0, 1.0)) : 0.5f;
  }
  return out;
}

Tensor apply_cosine_window(const Tensor& scores, double influence) {
  if (influence <= 0.0) return scores;
  auto hann = [](int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    if (n > 1) {
      for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 0.5) / n);
    }
    return w;
  };
  const auto wy = hann(scores.height());
  const auto wx = hann(scores.width());
  Tensor out = scores;
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        const double v = (1.0 - influence) * out.at(c, y, x) + influence * wy[y] * wx[x];
        out.at(c, y, x) = static_cast<float>(v);
      }
    }
  }
  return out;
}

Detection select_best(const Tensor& scores, const RegressionField& reg) {
  if (scores.empty()) throw ArgumentError("select_best: empty score map");
  if (scores.channels() != 1 || scores.height() != reg.grid.height || scores.width() != reg.grid.width) {
    throw ShapeError("select_best: score map and regression field differ in shape");
  }
  const auto data = scores.data();
  // max_element returns the first maximum, i.e. the row-major tie-break.
  const auto best = std::max_element(data.begin(), data.end());
  const auto flat = static_cast<int>(best - data.begin());
  const Cell cell{flat % scores.width(), flat / scores.width()};
  const Point c = cell_to_image(cell, reg.grid);
  const std::size_t i = reg.index(cell);
  return {decode_box(c.x, c.y, reg.left[i], reg.top[i], reg.right[i], reg.bottom[i]), *best, cell};
}

}  // namespace duotrack
