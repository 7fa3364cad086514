#include "duotrack/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "correlation_detail.hpp"
#include "duotrack/errors.hpp"

namespace duotrack {

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.channels()) + "x" + std::to_string(t.height()) + "x" +
         std::to_string(t.width());
}

void check_conv_args(const Tensor& input, const ConvWeights& w, int stride, int pad) {
  w.validate();
  if (input.channels() != w.in_channels) {
    throw ShapeError("conv: input has " + std::to_string(input.channels()) +
                     " channels, weights expect " + std::to_string(w.in_channels));
  }
  if (stride < 1) throw ShapeError("conv: stride must be >= 1");
  if (pad < 0) throw ShapeError("conv: negative padding");
}

}  // namespace

Tensor::Tensor(int channels, int height, int width, float fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) throw ShapeError("negative tensor extent");
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor::Tensor(int channels, int height, int width, std::vector<float> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
  if (channels < 0 || height < 0 || width < 0) throw ShapeError("negative tensor extent");
  if (data_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw ShapeError("tensor data length does not match extents");
  }
}

std::span<float> Tensor::channel(int c) {
  const std::size_t plane = static_cast<std::size_t>(height_) * width_;
  return std::span<float>(data_).subspan(c * plane, plane);
}

std::span<const float> Tensor::channel(int c) const {
  const std::size_t plane = static_cast<std::size_t>(height_) * width_;
  return std::span<const float>(data_).subspan(c * plane, plane);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

ConvWeights::ConvWeights(int out_ch, int in_ch, int k)
    : out_channels(out_ch),
      in_channels(in_ch),
      kernel(k),
      values(static_cast<std::size_t>(out_ch) * in_ch * k * k, 0.0f),
      bias(static_cast<std::size_t>(out_ch), 0.0f) {
  validate();
}

void ConvWeights::validate() const {
  if (out_channels <= 0 || in_channels <= 0 || kernel <= 0) {
    throw ShapeError("conv weights need positive channel counts and kernel size");
  }
  if (values.size() != static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel) {
    throw ShapeError("conv weights length does not match out*in*k*k");
  }
  if (bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ShapeError("conv bias length does not match out_channels");
  }
}

int conv_output_extent(int in, int kernel, int stride, int pad) {
  const int span = in + 2 * pad - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

int conv_transpose_output_extent(int in, int kernel, int stride, int pad) {
  return (in - 1) * stride - 2 * pad + kernel;
}

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride, int pad) {
  check_conv_args(input, w, stride, pad);
  const int oh = conv_output_extent(input.height(), w.kernel, stride, pad);
  const int ow = conv_output_extent(input.width(), w.kernel, stride, pad);
  if (oh <= 0 || ow <= 0) {
    throw ShapeError("conv2d: non-positive output extent for input " + shape_str(input));
  }
  const int in_h = input.height();
  const int in_w = input.width();
  const int k = w.kernel;
  Tensor out(w.out_channels, oh, ow);

#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < w.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        const int x_base = ox * stride - pad;
        const int kx_lo = std::max(0, -x_base);
        const int kx_hi = std::min(k, in_w - x_base);
        double acc = w.bias[o];
        for (int i = 0; i < w.in_channels; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= in_h) continue;
            const float* in_row = input.data().data() + (static_cast<std::size_t>(i) * in_h + iy) * in_w;
            const float* w_row = &w.values[((static_cast<std::size_t>(o) * w.in_channels + i) * k + ky) * k];
            float row = 0.0f;
#pragma omp simd reduction(+ : row)
            for (int kx = kx_lo; kx < kx_hi; ++kx) row += w_row[kx] * in_row[x_base + kx];
            acc += row;
          }
        }
        out.at(o, oy, ox) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor conv_transpose2d(const Tensor& input, const ConvWeights& w, int stride, int pad) {
  check_conv_args(input, w, stride, pad);
  const int oh = conv_transpose_output_extent(input.height(), w.kernel, stride, pad);
  const int ow = conv_transpose_output_extent(input.width(), w.kernel, stride, pad);
  if (oh <= 0 || ow <= 0) {
    throw ShapeError("conv_transpose2d: non-positive output extent for input " + shape_str(input));
  }
  const int in_h = input.height();
  const int in_w = input.width();
  const int k = w.kernel;
  Tensor out(w.out_channels, oh, ow);

  // Gather form: output (oy, ox) receives input (iy, ix) through tap (ky, kx)
  // when oy = iy*stride + ky - pad.
#pragma omp parallel for collapse(2) schedule(static)
  for (int o = 0; o < w.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = w.bias[o];
        for (int i = 0; i < w.in_channels; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            const int ny = oy + pad - ky;
            if (ny < 0 || ny % stride != 0) continue;
            const int iy = ny / stride;
            if (iy >= in_h) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int nx = ox + pad - kx;
              if (nx < 0 || nx % stride != 0) continue;
              const int ix = nx / stride;
              if (ix >= in_w) continue;
              acc += static_cast<double>(w.at(o, i, ky, kx)) * input.at(i, iy, ix);
            }
          }
        }
        out.at(o, oy, ox) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor relu(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data()) v = std::max(v, 0.0f);
  return out;
}

Tensor sigmoid(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.data()) v = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
  return out;
}

Tensor softmax_channels(const Tensor& input) {
  if (input.channels() < 2) throw ShapeError("softmax_channels needs at least 2 channels");
  const int channels = input.channels();
  const std::size_t plane = static_cast<std::size_t>(input.height()) * input.width();
  Tensor out(channels, input.height(), input.width());
  const float* in = input.data().data();
  float* dst = out.data().data();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(plane); ++p) {
    double peak = in[p];
    for (int c = 1; c < channels; ++c) peak = std::max(peak, static_cast<double>(in[c * plane + p]));
    double total = 0.0;
    for (int c = 0; c < channels; ++c) total += std::exp(in[c * plane + p] - peak);
    for (int c = 0; c < channels; ++c) {
      dst[c * plane + p] = static_cast<float>(std::exp(in[c * plane + p] - peak) / total);
    }
  }
  return out;
}

namespace {

// Valid-mode correlation of template channels [c0, c1) against the same
// search channels, summed into one output plane.
void correlate_into(const Tensor& tmpl, const Tensor& search, int c0, int c1, float* out,
                    int oh, int ow) {
  const int th = tmpl.height();
  const int tw = tmpl.width();
  const int sh = search.height();
  const int sw = search.width();
  const float* t = tmpl.data().data();
  const float* s = search.data().data();

#pragma omp parallel for schedule(static)
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int c = c0; c < c1; ++c) {
        for (int ty = 0; ty < th; ++ty) {
          const float* t_row = t + (static_cast<std::size_t>(c) * th + ty) * tw;
          const float* s_row = s + (static_cast<std::size_t>(c) * sh + y + ty) * sw + x;
          float row = 0.0f;
#pragma omp simd reduction(+ : row)
          for (int tx = 0; tx < tw; ++tx) row += t_row[tx] * s_row[tx];
          acc += row;
        }
      }
      out[static_cast<std::size_t>(y) * ow + x] = static_cast<float>(acc);
    }
  }
}

void correlate_channels(const Tensor& tmpl, const Tensor& search, int c0, int c1,
                        CorrelationMode mode, std::span<float> out, int oh, int ow) {
  if (mode == CorrelationMode::raw) {
    correlate_into(tmpl, search, c0, c1, out.data(), oh, ow);
    return;
  }
  const auto centered = detail::center_template(tmpl, c0, c1);
  correlate_into(centered.values, search, c0, c1, out.data(), oh, ow);
  const auto stats = detail::window_stats(search, c0, c1, tmpl.height(), tmpl.width());
  const double n = static_cast<double>(c1 - c0) * tmpl.height() * tmpl.width();
  detail::normalize_response(out, stats, centered.norm, n);
}

}  // namespace

Tensor cross_correlate(const Tensor& template_feat, const Tensor& search_feat,
                       CorrelationMode mode) {
  detail::check_correlation_shapes(template_feat, search_feat);
  const int oh = search_feat.height() - template_feat.height() + 1;
  const int ow = search_feat.width() - template_feat.width() + 1;
  Tensor out(1, oh, ow);
  correlate_channels(template_feat, search_feat, 0, template_feat.channels(), mode, out.data(), oh,
                     ow);
  return out;
}

Tensor depthwise_correlate(const Tensor& template_feat, const Tensor& search_feat,
                           CorrelationMode mode) {
  detail::check_correlation_shapes(template_feat, search_feat);
  const int oh = search_feat.height() - template_feat.height() + 1;
  const int ow = search_feat.width() - template_feat.width() + 1;
  Tensor out(template_feat.channels(), oh, ow);
  for (int c = 0; c < template_feat.channels(); ++c) {
    correlate_channels(template_feat, search_feat, c, c + 1, mode, out.channel(c), oh, ow);
  }
  return out;
}

Tensor pad_zero(const Tensor& input, int top, int bottom, int left, int right) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0) throw ShapeError("pad_zero: negative pad");
  Tensor out(input.channels(), input.height() + top + bottom, input.width() + left + right);
  for (int c = 0; c < input.channels(); ++c) {
    for (int y = 0; y < input.height(); ++y) {
      for (int x = 0; x < input.width(); ++x) out.at(c, y + top, x + left) = input.at(c, y, x);
    }
  }
  return out;
}

Tensor resize_nearest(const Tensor& input, int height, int width) {
  if (height <= 0 || width <= 0) throw ShapeError("resize_nearest: non-positive target extent");
  if (input.height() == height && input.width() == width) return input;
  if (input.height() <= 0 || input.width() <= 0) throw ShapeError("resize_nearest: empty input");
  Tensor out(input.channels(), height, width);
  for (int c = 0; c < input.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      // Source sample nearest to the destination pixel centre.
      const int sy = static_cast<int>((2LL * y + 1) * input.height() / (2LL * height));
      for (int x = 0; x < width; ++x) {
        const int sx = static_cast<int>((2LL * x + 1) * input.width() / (2LL * width));
        out.at(c, y, x) = input.at(c, sy, sx);
      }
    }
  }
  return out;
}

Tensor sum_channels(const Tensor& input) {
  Tensor out(1, input.height(), input.width());
  auto dst = out.channel(0);
  for (std::size_t p = 0; p < dst.size(); ++p) {
    double acc = 0.0;
    for (int c = 0; c < input.channels(); ++c) acc += input.channel(c)[p];
    dst[p] = static_cast<float>(acc);
  }
  return out;
}

namespace detail {

void check_correlation_shapes(const Tensor& template_feat, const Tensor& search_feat) {
  if (template_feat.channels() != search_feat.channels()) {
    throw ShapeError("correlation: channel mismatch " + shape_str(template_feat) + " vs " +
                     shape_str(search_feat));
  }
  if (template_feat.channels() == 0 || template_feat.height() == 0 || template_feat.width() == 0) {
    throw ShapeError("correlation: empty template");
  }
  if (template_feat.height() > search_feat.height() || template_feat.width() > search_feat.width()) {
    throw ShapeError("correlation: template " + shape_str(template_feat) +
                     " larger than search " + shape_str(search_feat));
  }
}

CenteredTemplate center_template(const Tensor& template_feat, int c0, int c1) {
  CenteredTemplate result{template_feat, 0.0};
  double sum = 0.0;
  std::size_t n = 0;
  for (int c = c0; c < c1; ++c) {
    for (float v : template_feat.channel(c)) sum += v;
    n += template_feat.channel(c).size();
  }
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (int c = c0; c < c1; ++c) {
    for (float& v : result.values.channel(c)) {
      v = static_cast<float>(v - mean);
      sq += static_cast<double>(v) * v;
    }
  }
  result.norm = std::sqrt(sq);
  return result;
}

WindowStats window_stats(const Tensor& search_feat, int c0, int c1, int template_h,
                         int template_w) {
  const int sh = search_feat.height();
  const int sw = search_feat.width();
  const std::size_t stride = static_cast<std::size_t>(sw) + 1;
  std::vector<double> integral(stride * (sh + 1), 0.0);
  std::vector<double> integral_sq(stride * (sh + 1), 0.0);
  for (int y = 0; y < sh; ++y) {
    double row = 0.0;
    double row_sq = 0.0;
    for (int x = 0; x < sw; ++x) {
      for (int c = c0; c < c1; ++c) {
        const double v = search_feat.at(c, y, x);
        row += v;
        row_sq += v * v;
      }
      integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
      integral_sq[(y + 1) * stride + x + 1] = integral_sq[y * stride + x + 1] + row_sq;
    }
  }
  WindowStats stats;
  stats.height = sh - template_h + 1;
  stats.width = sw - template_w + 1;
  stats.sum.resize(static_cast<std::size_t>(stats.height) * stats.width);
  stats.sum_sq.resize(stats.sum.size());
  auto box = [&](const std::vector<double>& table, int y, int x) {
    return table[(y + template_h) * stride + x + template_w] - table[y * stride + x + template_w] -
           table[(y + template_h) * stride + x] + table[y * stride + x];
  };
  for (int y = 0; y < stats.height; ++y) {
    for (int x = 0; x < stats.width; ++x) {
      stats.sum[static_cast<std::size_t>(y) * stats.width + x] = box(integral, y, x);
      stats.sum_sq[static_cast<std::size_t>(y) * stats.width + x] = box(integral_sq, y, x);
    }
  }
  return stats;
}

void normalize_response(std::span<float> response, const WindowStats& stats,
                        double template_norm, double n) {
  constexpr double kFlat = 1e-9;
  for (std::size_t p = 0; p < response.size(); ++p) {
    const double variance = stats.sum_sq[p] - stats.sum[p] * stats.sum[p] / n;
    if (template_norm <= kFlat || variance <= kFlat * n) {
      response[p] = 0.0f;
      continue;
    }
    const double value = response[p] / (template_norm * std::sqrt(variance));
    response[p] = static_cast<float>(std::clamp(value, -1.0, 1.0));
  }
}

}  // namespace detail

}  // namespace duotrack
