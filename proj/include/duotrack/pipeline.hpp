#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "duotrack/backbone.hpp"
#include "duotrack/dataset.hpp"
#include "duotrack/detect.hpp"
#include "duotrack/geometry.hpp"
#include "duotrack/mask.hpp"
#include "duotrack/metrics.hpp"
#include "duotrack/segment.hpp"
#include "duotrack/tensor.hpp"
#include "duotrack/trace.hpp"

namespace duotrack {

struct CropSpec {
  int exemplar_out = 127;
  int search_out = 255;
  double context = 0.5;

  void validate() const;
};

struct TrackerConfig {
  BackboneConfig backbone = BackboneConfig::identity();
  HeadConfig head{.correlation = CorrelationMode::normalized};
  SegConfig seg;
  CropSpec crop;
  double size_smoothing = 0.3;
  std::optional<std::filesystem::path> backbone_weights;  // overrides seeded weights

  void validate() const;
};

/// Side of the square context window around a w x h target:
/// sqrt((w + c(w+h)) (h + c(w+h))).
double context_side(double width, double height, double context);

/// Per-channel mean of a frame, used as crop padding.
std::vector<float> channel_means(const Tensor& frame);

/// Square window of extent `side` centred at `center`, resampled to out x out
/// with bilinear interpolation. Area outside the frame takes `pad_value`.
Tensor crop_patch(const Tensor& frame, Point center, double side, int out,
                  std::span<const float> pad_value);

struct TrackerState {
  Tensor template_patch;
  FeaturePyramid template_pyr;
  AxisBox template_box_in_patch;
  Point current_center;
  double current_width = 0.0;
  double current_height = 0.0;
};

struct FrameResult {
  Polygon polygon;   // final output (rotated box, or the stage-1 box on fallback)
  AxisBox axis_box;  // stage-1 detection in frame coordinates
  double score = 0.0;
  Mask mask;         // stage-2 mask over the search patch
  bool fallback = false;
};

/// Anything the run protocols can drive. Frame indices let test stubs replay
/// ground truth.
class SingleTargetTracker {
 public:
  virtual ~SingleTargetTracker() = default;
  virtual void initialize(const Tensor& frame, const Polygon& region, std::size_t frame_index) = 0;
  virtual Polygon update(const Tensor& frame, std::size_t frame_index) = 0;
};

/// Correlation detection followed by segmentation-based rotated-box fitting.
class TwoStageTracker : public SingleTargetTracker {
 public:
  explicit TwoStageTracker(TrackerConfig config);

  void init(const Tensor& frame, const Polygon& region);
  FrameResult track_frame(const Tensor& frame);

  void initialize(const Tensor& frame, const Polygon& region, std::size_t) override { init(frame, region); }
  Polygon update(const Tensor& frame, std::size_t) override { return track_frame(frame).polygon; }

  bool initialized() const { return state_.has_value(); }
  const TrackerState& state() const;
  const TrackerConfig& config() const { return config_; }
  const Backbone& backbone() const { return *backbone_; }

 private:
  TrackerConfig config_;
  std::shared_ptr<const Backbone> backbone_;
  DetectionHead head_;
  std::optional<NeuralRefiner> refiner_;
  std::optional<TrackerState> state_;
};

/// Called after every frame of a run with the record that was appended.
using FrameObserver = std::function<void(std::size_t index, const Tensor& frame, const FrameRecord& record)>;

/// Init on frame 0, Tracked on every later frame; no resets.
RunTrace run_oneshot(const Sequence& seq, SingleTargetTracker& tracker, const FrameObserver& observer = {});

/// Zero overlap with the ground truth marks a failure; reinit_gap Skipped
/// frames follow, then the tracker is re-initialised from ground truth.
RunTrace run_supervised(const Sequence& seq, SingleTargetTracker& tracker, int reinit_gap,
                        const FrameObserver& observer = {});

}  // namespace duotrack
