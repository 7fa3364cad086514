#pragma once

#include <cstdint>
#include <vector>

#include "duotrack/backbone.hpp"
#include "duotrack/geometry.hpp"
#include "duotrack/tensor.hpp"

namespace duotrack {

/// Grid coordinates of a response-map location; x is the column.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Maps response cells to patch pixels: p = index * stride + offset.
struct GridSpec {
  int height = 0;
  int width = 0;
  int stride = 1;
  double offset_x = 0.5;
  double offset_y = 0.5;

  /// Offsets default to half a stride.
  static GridSpec centered(int height, int width, int stride);
};

Point cell_to_image(Cell cell, int stride, double offset);
Point cell_to_image(Cell cell, const GridSpec& grid);

/// Per-cell side distances (left, top, right, bottom) and positive flags.
struct RegressionField {
  GridSpec grid;
  std::vector<double> left;
  std::vector<double> top;
  std::vector<double> right;
  std::vector<double> bottom;
  std::vector<std::uint8_t> positive;

  RegressionField() = default;
  explicit RegressionField(const GridSpec& g);

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * grid.width + c.x; }
  std::size_t positive_count() const;
};

struct Detection {
  AxisBox box;
  double score = 0.0;
  Cell cell;
};

/// A cell is positive when its image point lies strictly inside `gt`; its
/// distances are l = x - x0, t = y - y0, r = x1 - x, b = y1 - y. Negative
/// cells carry zero distances.
RegressionField encode_targets(const AxisBox& gt, const GridSpec& grid);

/// (cx - l, cy - t, cx + r, cy + b). Throws DegenerateRegionError on zero
/// width or height.
AxisBox decode_box(double cx, double cy, double l, double t, double r, double b);

/// Every cell predicts a box of the given size centred on its image point.
RegressionField constant_size_field(const GridSpec& grid, double box_width, double box_height);

enum class HeadKind {
  corr_peak,  // correlation response, min-max normalised; works untrained
  conv,       // depthwise correlation + seeded conv towers; shape-complete, untrained
};

struct HeadConfig {
  HeadKind kind = HeadKind::corr_peak;
  CorrelationMode correlation = CorrelationMode::raw;
  int aggregate_layers = 2;       // deepest stages whose responses are averaged
  double window_influence = 0.0;  // cosine-window blend, 0 disables it
  int tower_channels = 32;
  std::uint64_t seed = 7;
};

class DetectionHead {
 public:
  DetectionHead(HeadConfig config, const BackboneConfig& backbone);

  const HeadConfig& config() const { return config_; }

  /// Response grid for the given template/search pyramids.
  GridSpec grid(const FeaturePyramid& template_pyr, const FeaturePyramid& search_pyr) const;

  /// Single-channel score map with values in [0, 1].
  Tensor classify(const FeaturePyramid& template_pyr, const FeaturePyramid& search_pyr) const;

  /// Conv head only: per-cell distances predicted by the regression tower.
  RegressionField regress(const FeaturePyramid& template_pyr, const FeaturePyramid& search_pyr) const;

 private:
  struct Tower {
    ConvWeights hidden;
    ConvWeights out;
  };
  struct StageTowers {
    Tower cls;
    Tower reg;
  };

  std::vector<std::size_t> used_stages(const FeaturePyramid& template_pyr,
                                       const FeaturePyramid& search_pyr) const;
  std::vector<Tensor> conv_outputs(const FeaturePyramid& template_pyr,
                                   const FeaturePyramid& search_pyr, bool regression) const;

  HeadConfig config_;
  std::vector<StageTowers> towers_;  // indexed by backbone stage
};

Tensor classify(const FeaturePyramid& template_pyr, const FeaturePyramid& search_pyr,
                const DetectionHead& head);

/// Maps values to [0, 1]; a constant map becomes 0.5 everywhere.
Tensor min_max_normalize(const Tensor& response);

/// Blends a separable Hann window into a single-channel score map.
Tensor apply_cosine_window(const Tensor& scores, double influence);

/// Highest-scoring cell (first in row-major order on ties), decoded through
/// the regression field.
Detection select_best(const Tensor& scores, const RegressionField& reg);

}  // namespace duotrack
