#include "duotrack/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "duotrack/errors.hpp"

namespace duotrack {

void CropSpec::validate() const {
  if (exemplar_out < 1) throw ConfigError("crop exemplar_out must be positive");
  if (search_out <= exemplar_out) throw ConfigError("crop search_out must exceed exemplar_out");
  if (context < 0.0) throw ConfigError("crop context must be non-negative");
}

void TrackerConfig::validate() const {
  backbone.validate();
  seg.validate();
  crop.validate();
  if (!(size_smoothing >= 0.0 && size_smoothing <= 1.0)) {
    throw ConfigError("tracker size_smoothing must lie in [0, 1]");
  }
}

double context_side(double width, double height, double context) {
  const double pad = context * (width + height);
  return std::sqrt((width + pad) * (height + pad));
}

std::vector<float> channel_means(const Tensor& frame) {
  std::vector<float> means;
  for (int c = 0; c < frame.channels(); ++c) {
    double sum = 0.0;
    for (float v : frame.channel(c)) sum += v;
    const auto n = frame.channel(c).size();
    means.push_back(n ? static_cast<float>(sum / static_cast<double>(n)) : 0.0f);
  }
  return means;
}

Tensor crop_patch(const Tensor& frame, Point center, double side, int out,
                  std::span<const float> pad_value) {
  if (out < 1) throw ArgumentError("crop_patch: output size must be positive");
  if (!(side > 0.0)) throw ArgumentError("crop_patch: window side must be positive");
  if (pad_value.size() != static_cast<std::size_t>(frame.channels())) {
    throw ArgumentError("crop_patch: pad value needs one entry per channel");
  }
  const int h = frame.height();
  const int w = frame.width();
  const double step = side / out;
  const double left = center.x - 0.5 * side;
  const double top = center.y - 0.5 * side;

  // Sample coordinates in pixel-index space (pixel k has its centre at k + 0.5).
  std::vector<int> x0(out), y0(out);
  std::vector<float> ax(out), ay(out);
  for (int i = 0; i < out; ++i) {
    const double fx = left + (i + 0.5) * step - 0.5;
    const double fy = top + (i + 0.5) * step - 0.5;
    x0[i] = static_cast<int>(std::floor(fx));
    y0[i] = static_cast<int>(std::floor(fy));
    ax[i] = static_cast<float>(fx - x0[i]);
    ay[i] = static_cast<float>(fy - y0[i]);
  }

  Tensor patch(frame.channels(), out, out);
  for (int c = 0; c < frame.channels(); ++c) {
    const float pad = pad_value[c];
    auto sample = [&](int y, int x) { return (y < 0 || x < 0 || y >= h || x >= w) ? pad : frame.at(c, y, x); };
    for (int v = 0; v < out; ++v) {
      for (int u = 0; u < out; ++u) {
        // a + t (b - a) keeps flat regions exact
        const float s00 = sample(y0[v], x0[u]), s01 = sample(y0[v], x0[u] + 1);
        const float s10 = sample(y0[v] + 1, x0[u]), s11 = sample(y0[v] + 1, x0[u] + 1);
        const float top_row = s00 + ax[u] * (s01 - s00);
        const float bottom_row = s10 + ax[u] * (s11 - s10);
        patch.at(c, v, u) = top_row + ay[v] * (bottom_row - top_row);
      }
    }
  }
  return patch;
}

namespace {

std::shared_ptr<const Backbone> make_backbone(const TrackerConfig& config) {
  if (config.backbone_weights) {
    return std::make_shared<const Backbone>(Backbone::load(*config.backbone_weights));
  }
  return std::make_shared<const Backbone>(config.backbone);
}

void gate_outside(ProbMap& map, const AxisBox& box, double margin) {
  const double mx = margin * box.width();
  const double my = margin * box.height();
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const double cx = x + 0.5;
      const double cy = y + 0.5;
      if (cx < box.x0 - mx || cx >= box.x1 + mx || cy < box.y0 - my || cy >= box.y1 + my) map.at(y, x) = 0.0f;
    }
  }
}

}  // namespace

TwoStageTracker::TwoStageTracker(TrackerConfig config)
    : config_((config.validate(), std::move(config))),
      backbone_(make_backbone(config_)),
      head_(config_.head, backbone_->config()) {
  if (config_.seg.backend == SegBackend::neural) {
    refiner_.emplace(backbone_->config(), config_.seg.refine_width, config_.seg.seed);
  }
}

const TrackerState& TwoStageTracker::state() const {
  if (!state_) throw ArgumentError("tracker is not initialised");
  return *state_;
}

void TwoStageTracker::init(const Tensor& frame, const Polygon& region) {
  if (frame.channels() != 3) throw ShapeError("tracker expects 3-channel frames");
  AxisBox box = polygon_to_axis(region);
  box.x0 = std::clamp(box.x0, 0.0, double(frame.width()));
  box.x1 = std::clamp(box.x1, 0.0, double(frame.width()));
  box.y0 = std::clamp(box.y0, 0.0, double(frame.height()));
  box.y1 = std::clamp(box.y1, 0.0, double(frame.height()));
  if (!box.valid()) throw DegenerateRegionError("init: region has no area inside the frame");

  const auto& crop = config_.crop;
  const double side = context_side(box.width(), box.height(), crop.context);
  const double scale = crop.exemplar_out / side;
  const auto pad = channel_means(frame);

  TrackerState s;
  s.template_patch = crop_patch(frame, box.center(), side, crop.exemplar_out, pad);
  s.template_pyr = backbone_->extract(s.template_patch);
  s.template_box_in_patch = AxisBox::from_center({0.5 * crop.exemplar_out, 0.5 * crop.exemplar_out},
                                                 box.width() * scale, box.height() * scale);
  s.current_center = box.center();
  s.current_width = box.width();
  s.current_height = box.height();
  state_ = std::move(s);
}

FrameResult TwoStageTracker::track_frame(const Tensor& frame) {
  if (!state_) throw ArgumentError("track_frame called before init");
  if (frame.channels() != 3) throw ShapeError("tracker expects 3-channel frames");
  TrackerState& s = *state_;
  const auto& crop = config_.crop;

  // Stage 1: correlation detection in the search window.
  const double exemplar_side = context_side(s.current_width, s.current_height, crop.context);
  const double search_side = exemplar_side * crop.search_out / crop.exemplar_out;
  const double scale = crop.search_out / search_side;
  const Tensor search = crop_patch(frame, s.current_center, search_side, crop.search_out, channel_means(frame));
  const FeaturePyramid search_pyr = backbone_->extract(search);

  const GridSpec grid = head_.grid(s.template_pyr, search_pyr);
  const Tensor scores = head_.classify(s.template_pyr, search_pyr);
  const RegressionField reg = config_.head.kind == HeadKind::conv
                                  ? head_.regress(s.template_pyr, search_pyr)
                                  : constant_size_field(grid, s.current_width * scale, s.current_height * scale);
  const Detection det = select_best(scores, reg);

  const double origin_x = s.current_center.x - 0.5 * search_side;
  const double origin_y = s.current_center.y - 0.5 * search_side;
  auto to_frame = [&](Point p) { return Point{origin_x + p.x / scale, origin_y + p.y / scale}; };
  const Point tl = to_frame({det.box.x0, det.box.y0});
  const Point br = to_frame({det.box.x1, det.box.y1});

  FrameResult result;
  result.axis_box = {tl.x, tl.y, br.x, br.y};
  result.score = det.score;

  // Stage 2: segmentation gated by the detection, then a rotated box.
  ProbMap prob;
  if (config_.seg.backend == SegBackend::histogram) {
    prob = segment_histogram(s.template_patch, s.template_box_in_patch, search, det.box, config_.seg);
  } else {
    const Tensor& t = s.template_pyr.deepest().features;
    const Tensor& d = search_pyr.deepest().features;
    const Tensor seed = resize_nearest(sum_channels(depthwise_correlate(t, d)), d.height(), d.width());
    prob = refine_neural(search_pyr, seed, *refiner_, crop.search_out, crop.search_out);
    gate_outside(prob, det.box, config_.seg.box_margin);
  }
  result.mask = binarize(prob, config_.seg.threshold);
  if (config_.seg.keep_largest_component) result.mask = largest_component(result.mask);

  if (result.mask.empty()) {
    result.polygon = axis_to_polygon(result.axis_box);
    result.fallback = true;
  } else {
    const RotatedBox rect = min_area_rect(mask_to_points(result.mask));
    for (const Point& corner : rect.corners()) result.polygon.vertices.push_back(to_frame(corner));
  }

  // Only the stage-1 box drives the state.
  const double a = config_.size_smoothing;
  s.current_center = {std::clamp(result.axis_box.center().x, 0.0, double(frame.width())),
                      std::clamp(result.axis_box.center().y, 0.0, double(frame.height()))};
  s.current_width = std::max(1.0, (1.0 - a) * s.current_width + a * result.axis_box.width());
  s.current_height = std::max(1.0, (1.0 - a) * s.current_height + a * result.axis_box.height());
  return result;
}

RunTrace run_oneshot(const Sequence& seq, SingleTargetTracker& tracker, const FrameObserver& observer) {
  RunTrace trace{seq.name(), {}};
  const auto& gt = seq.ground_truth();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Tensor frame = seq.frame(i);
    if (i == 0) {
      tracker.initialize(frame, gt[0], 0);
      trace.frames.push_back(FrameRecord::make_init());
    } else {
      trace.frames.push_back(FrameRecord::make_tracked(tracker.update(frame, i)));
    }
    if (observer) observer(i, frame, trace.frames.back());
  }
  return trace;
}

RunTrace run_supervised(const Sequence& seq, SingleTargetTracker& tracker, int reinit_gap,
                        const FrameObserver& observer) {
  if (reinit_gap < 0) throw ArgumentError("reinit_gap must be non-negative");
  RunTrace trace{seq.name(), {}};
  const auto& gt = seq.ground_truth();
  const std::size_t n = seq.size();
  bool need_init = true;
  std::size_t i = 0;
  while (i < n) {
    const Tensor frame = seq.frame(i);
    if (need_init) {
      tracker.initialize(frame, gt[i], i);
      trace.frames.push_back(FrameRecord::make_init());
      need_init = false;
      if (observer) observer(i, frame, trace.frames.back());
      ++i;
      continue;
    }
    Polygon region = tracker.update(frame, i);
    if (iou_polygon(region, gt[i]) > 0.0) {
      trace.frames.push_back(FrameRecord::make_tracked(std::move(region)));
      if (observer) observer(i, frame, trace.frames.back());
      ++i;
      continue;
    }
    trace.frames.push_back(FrameRecord::make_failed());
    if (observer) observer(i, frame, trace.frames.back());
    ++i;
    for (int k = 0; k < reinit_gap && i < n; ++k, ++i) trace.frames.push_back(FrameRecord::make_skipped());
    need_init = true;
  }
  return trace;
}

}  // namespace duotrack
