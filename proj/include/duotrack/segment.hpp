#pragma once

#include <cstdint>
#include <vector>

#include "duotrack/backbone.hpp"
#include "duotrack/geometry.hpp"
#include "duotrack/mask.hpp"
#include "duotrack/tensor.hpp"

namespace duotrack {

enum class SegBackend { neural, histogram };

struct SegConfig {
  SegBackend backend = SegBackend::histogram;
  double threshold = 0.5;
  double box_margin = 0.25;  // gate expansion per side, as a fraction of the box extent
  bool keep_largest_component = true;
  int histogram_bins = 8;  // per colour channel
  int refine_width = 32;   // channel width of the neural refinement path
  std::uint64_t seed = 11;

  void validate() const;
};

/// Upsampling refinement network: three (skip add, ReLU, 2x transposed
/// convolution) modules fed by the stride-8/4/2 backbone stages, then a
/// 2-channel 3x3 convolution and a channel softmax.
class NeuralRefiner {
 public:
  NeuralRefiner(const BackboneConfig& backbone, int width, std::uint64_t seed);

  /// Background/foreground probabilities (channels 0 and 1), cropped to
  /// out_height x out_width.
  Tensor probabilities(const FeaturePyramid& search_pyr, const Tensor& seed_map, int out_height,
                       int out_width) const;

 private:
  struct Module {
    std::size_t skip_stage = 0;
    ConvWeights skip_projection;
    ConvWeights upsample;
  };

  ConvWeights seed_projection_;
  std::vector<Module> modules_;
  ConvWeights classifier_;
  std::size_t stage_count_ = 0;
};

/// Foreground channel of the refiner at out_height x out_width.
ProbMap refine_neural(const FeaturePyramid& search_pyr, const Tensor& seed_map,
                      const NeuralRefiner& weights, int out_height, int out_width);

/// Colour-histogram posterior P(fg) = h_f / (h_f + h_b) over the search patch,
/// with Laplace-smoothed normalised histograms from the template. Pixels whose
/// centres fall outside the margin-expanded detected box are set to 0.
ProbMap segment_histogram(const Tensor& template_patch, const AxisBox& template_fg,
                          const Tensor& search_patch, const AxisBox& detected,
                          const SegConfig& cfg);

/// bit = value > threshold.
Mask binarize(const ProbMap& p, double threshold);

/// Largest 4-connected component; ties go to the component that contains the
/// earliest row-major pixel.
Mask largest_component(const Mask& m);

}  // namespace duotrack
