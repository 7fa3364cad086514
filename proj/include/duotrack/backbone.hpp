#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "duotrack/tensor.hpp"

namespace duotrack {

enum class BackboneKind { identity, conv };

/// Feature extractor layout. Conv stages are 3x3 convolutions with padding 1
/// followed by ReLU, so a stage of stride s maps extent n to ceil(n / s).
struct BackboneConfig {
  BackboneKind kind = BackboneKind::conv;
  std::vector<int> stage_channels{16, 32, 64, 64};
  std::vector<int> stage_strides{2, 2, 2, 1};
  int total_stride = 8;
  std::uint64_t seed = 1;

  /// Raw-pixel pass-through: one stage, 3 channels, stride 1.
  static BackboneConfig identity();
  /// "default" (16,32,64,64), "slim" (8,16,32) or "wide" (16,32,48,64,64);
  /// all with total stride 8.
  static BackboneConfig layout(std::string_view name, std::uint64_t seed = 1);

  void validate() const;

  friend bool operator==(const BackboneConfig&, const BackboneConfig&) = default;
};

struct FeatureStage {
  Tensor features;
  int stride = 1;  // cumulative stride relative to the input patch

  friend bool operator==(const FeatureStage&, const FeatureStage&) = default;
};

/// Backbone outputs S0..Sk ordered shallow to deep.
struct FeaturePyramid {
  std::vector<FeatureStage> stages;

  const FeatureStage& deepest() const { return stages.back(); }
  /// First (shallowest) stage with the given cumulative stride, or nullptr.
  const FeatureStage* find_stride(int stride) const;

  friend bool operator==(const FeaturePyramid&, const FeaturePyramid&) = default;
};

class Backbone {
 public:
  explicit Backbone(BackboneConfig config);

  const BackboneConfig& config() const { return config_; }
  std::span<const ConvWeights> stage_weights() const { return weights_; }
  int output_channels() const { return config_.stage_channels.back(); }

  /// Same function for the template and the search branch.
  FeaturePyramid extract(const Tensor& patch) const;

  /// Flat little-endian weight file: magic, kind, stage layout, seed, then
  /// each stage's weights followed by its bias as 32-bit floats.
  void save(const std::filesystem::path& path) const;
  static Backbone load(const std::filesystem::path& path);

 private:
  Backbone(BackboneConfig config, std::vector<ConvWeights> weights);

  BackboneConfig config_;
  std::vector<ConvWeights> weights_;
};

Backbone build_backbone(const BackboneConfig& config);
FeaturePyramid extract_features(const Backbone& backbone, const Tensor& patch);

/// Elementwise mean of equally shaped responses.
Tensor aggregate_multilayer(std::span<const Tensor> responses);

}  // namespace duotrack
