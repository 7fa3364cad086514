#include <string>

#include "correlation_detail.hpp"
#include "duotrack/errors.hpp"
#include "duotrack/tensor.hpp"

namespace duotrack::reference {

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride, int pad) {
  w.validate();
  if (input.channels() != w.in_channels) throw ShapeError("conv2d: channel mismatch");
  if (stride < 1 || pad < 0) throw ShapeError("conv2d: bad stride or padding");
  const int oh = conv_output_extent(input.height(), w.kernel, stride, pad);
  const int ow = conv_output_extent(input.width(), w.kernel, stride, pad);
  if (oh <= 0 || ow <= 0) throw ShapeError("conv2d: non-positive output extent");

  Tensor out(w.out_channels, oh, ow);
  for (int o = 0; o < w.out_channels; ++o) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        double acc = w.bias[o];
        for (int i = 0; i < w.in_channels; ++i) {
          for (int ky = 0; ky < w.kernel; ++ky) {
            for (int kx = 0; kx < w.kernel; ++kx) {
              const int iy = oy * stride + ky - pad;
              const int ix = ox * stride + kx - pad;
              if (iy < 0 || ix < 0 || iy >= input.height() || ix >= input.width()) continue;
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

Tensor conv_transpose2d(const Tensor& input, const ConvWeights& w, int stride, int pad) {
  w.validate();
  if (input.channels() != w.in_channels) throw ShapeError("conv_transpose2d: channel mismatch");
  if (stride < 1 || pad < 0) throw ShapeError("conv_transpose2d: bad stride or padding");
  const int oh = conv_transpose_output_extent(input.height(), w.kernel, stride, pad);
  const int ow = conv_transpose_output_extent(input.width(), w.kernel, stride, pad);
  if (oh <= 0 || ow <= 0) throw ShapeError("conv_transpose2d: non-positive output extent");

  std::vector<double> acc(static_cast<std::size_t>(w.out_channels) * oh * ow, 0.0);
  for (int i = 0; i < w.in_channels; ++i) {
    for (int iy = 0; iy < input.height(); ++iy) {
      for (int ix = 0; ix < input.width(); ++ix) {
        const double v = input.at(i, iy, ix);
        for (int o = 0; o < w.out_channels; ++o) {
          for (int ky = 0; ky < w.kernel; ++ky) {
            const int oy = iy * stride + ky - pad;
            if (oy < 0 || oy >= oh) continue;
            for (int kx = 0; kx < w.kernel; ++kx) {
              const int ox = ix * stride + kx - pad;
              if (ox < 0 || ox >= ow) continue;
              acc[(static_cast<std::size_t>(o) * oh + oy) * ow + ox] += v * w.at(o, i, ky, kx);
            }
          }
        }
      }
    }
  }
  Tensor out(w.out_channels, oh, ow);
  for (int o = 0; o < w.out_channels; ++o) {
    for (int p = 0; p < oh * ow; ++p) {
      out.channel(o)[p] = static_cast<float>(acc[static_cast<std::size_t>(o) * oh * ow + p] + w.bias[o]);
    }
  }
  return out;
}

namespace {

void correlate_serial(const Tensor& tmpl, const Tensor& search, int c0, int c1,
                      CorrelationMode mode, std::span<float> out, int oh, int ow) {
  detail::CenteredTemplate centered;
  const Tensor* t = &tmpl;
  if (mode == CorrelationMode::normalized) {
    centered = detail::center_template(tmpl, c0, c1);
    t = &centered.values;
  }
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int c = c0; c < c1; ++c) {
        for (int ty = 0; ty < tmpl.height(); ++ty) {
          for (int tx = 0; tx < tmpl.width(); ++tx) {
            acc += static_cast<double>(t->at(c, ty, tx)) * search.at(c, y + ty, x + tx);
          }
        }
      }
      out[static_cast<std::size_t>(y) * ow + x] = static_cast<float>(acc);
    }
  }
  if (mode == CorrelationMode::normalized) {
    const auto stats = detail::window_stats(search, c0, c1, tmpl.height(), tmpl.width());
    const double n = static_cast<double>(c1 - c0) * tmpl.height() * tmpl.width();
    detail::normalize_response(out, stats, centered.norm, n);
  }
}

}  // namespace

Tensor cross_correlate(const Tensor& template_feat, const Tensor& search_feat,
                       CorrelationMode mode) {
  detail::check_correlation_shapes(template_feat, search_feat);
  const int oh = search_feat.height() - template_feat.height() + 1;
  const int ow = search_feat.width() - template_feat.width() + 1;
  Tensor out(1, oh, ow);
  correlate_serial(template_feat, search_feat, 0, template_feat.channels(), mode, out.data(), oh, ow);
  return out;
}

Tensor depthwise_correlate(const Tensor& template_feat, const Tensor& search_feat,
                           CorrelationMode mode) {
  detail::check_correlation_shapes(template_feat, search_feat);
  const int oh = search_feat.height() - template_feat.height() + 1;
  const int ow = search_feat.width() - template_feat.width() + 1;
  Tensor out(template_feat.channels(), oh, ow);
  for (int c = 0; c < template_feat.channels(); ++c) {
    correlate_serial(template_feat, search_feat, c, c + 1, mode, out.channel(c), oh, ow);
  }
  return out;
}

}  // namespace duotrack::reference
