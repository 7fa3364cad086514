#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace duotrack {

/// Dense channels x height x width array of floats, row-major within a channel.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, float fill = 0.0f);
  Tensor(int channels, int height, int width, std::vector<float> data);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<float> channel(int c);
  std::span<const float> channel(int c) const;

  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Square-kernel convolution parameters. `values` is laid out
/// [out][in][ky][kx] for both the forward and the transposed convolution.
struct ConvWeights {
  int out_channels = 0;
  int in_channels = 0;
  int kernel = 0;
  std::vector<float> values;
  std::vector<float> bias;

  ConvWeights() = default;
  ConvWeights(int out_ch, int in_ch, int k);

  float& at(int o, int i, int ky, int kx) {
    return values[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
  float at(int o, int i, int ky, int kx) const {
    return values[((static_cast<std::size_t>(o) * in_channels + i) * kernel + ky) * kernel + kx];
  }
  void validate() const;

  friend bool operator==(const ConvWeights&, const ConvWeights&) = default;
};

enum class CorrelationMode {
  raw,         // plain sliding dot product
  normalized,  // zero-mean normalized cross-correlation, values in [-1, 1]
};

int conv_output_extent(int in, int kernel, int stride, int pad);
int conv_transpose_output_extent(int in, int kernel, int stride, int pad);

// OpenMP kernels. Every output element is accumulated in a fixed order, so
// results do not depend on the thread count.

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride, int pad);
Tensor conv_transpose2d(const Tensor& input, const ConvWeights& w, int stride, int pad);
Tensor relu(const Tensor& input);
Tensor sigmoid(const Tensor& input);
Tensor softmax_channels(const Tensor& input);

/// Single-channel valid-mode response of size (Hs-Ht+1) x (Ws-Wt+1),
/// summed over channels. No kernel flip.
Tensor cross_correlate(const Tensor& template_feat, const Tensor& search_feat,
                       CorrelationMode mode = CorrelationMode::raw);

/// Per-channel valid-mode response with the template's channel count.
Tensor depthwise_correlate(const Tensor& template_feat, const Tensor& search_feat,
                           CorrelationMode mode = CorrelationMode::raw);

Tensor pad_zero(const Tensor& input, int top, int bottom, int left, int right);
Tensor resize_nearest(const Tensor& input, int height, int width);
Tensor sum_channels(const Tensor& input);

/// Serial loop versions of the kernels above. They are kept as the
/// reference path for tests and for the benchmark.
namespace reference {

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride, int pad);
/// Scatter form: every input element adds its kernel footprint to the output.
Tensor conv_transpose2d(const Tensor& input, const ConvWeights& w, int stride, int pad);
Tensor cross_correlate(const Tensor& template_feat, const Tensor& search_feat,
                       CorrelationMode mode = CorrelationMode::raw);
Tensor depthwise_correlate(const Tensor& template_feat, const Tensor& search_feat,
                           CorrelationMode mode = CorrelationMode::raw);

}  // namespace reference

}  // namespace duotrack
