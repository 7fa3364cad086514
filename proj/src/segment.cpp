#include "duotrack/segment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "duotrack/errors.hpp"
#include "seeded.hpp"

namespace duotrack {

void SegConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("seg threshold must lie in (0, 1)");
  if (box_margin < 0.0) throw ConfigError("seg box_margin must be non-negative");
  if (histogram_bins < 1 || histogram_bins > 64) throw ConfigError("seg histogram_bins must lie in [1, 64]");
  if (refine_width < 1) throw ConfigError("seg refine_width must be positive");
}

NeuralRefiner::NeuralRefiner(const BackboneConfig& backbone, int width, std::uint64_t seed) {
  backbone.validate();
  if (backbone.kind != BackboneKind::conv || backbone.total_stride != 8) {
    throw ShapeError("neural refinement needs a conv backbone with total stride 8");
  }
  if (width < 1) throw ConfigError("refine width must be positive");
  stage_count_ = backbone.stage_channels.size();

  detail::SeededUniform rng(seed);
  seed_projection_ = detail::seeded_conv(rng, width, 1, 1);
  for (int skip_stride : {8, 4, 2}) {
    int stride = 1;
    std::size_t found = stage_count_;
    for (std::size_t i = 0; i < stage_count_; ++i) {
      stride *= backbone.stage_strides[i];
      if (stride == skip_stride) {
        found = i;
        break;
      }
    }
    if (found == stage_count_) {
      throw ShapeError("neural refinement: backbone has no stage at stride " + std::to_string(skip_stride));
    }
    Module m;
    m.skip_stage = found;
    m.skip_projection = detail::seeded_conv(rng, width, backbone.stage_channels[found], 1);
    m.upsample = detail::seeded_conv(rng, width, width, 4);
    modules_.push_back(std::move(m));
  }
  classifier_ = detail::seeded_conv(rng, 2, width, 3);
}

Tensor NeuralRefiner::probabilities(const FeaturePyramid& search_pyr, const Tensor& seed_map,
                                    int out_height, int out_width) const {
  if (search_pyr.stages.size() != stage_count_) {
    throw ShapeError("neural refinement: pyramid depth differs from the configured backbone");
  }
  const Tensor& deepest = search_pyr.deepest().features;
  if (seed_map.channels() != 1 || seed_map.height() != deepest.height() ||
      seed_map.width() != deepest.width()) {
    throw ShapeError("neural refinement: seed map must be 1 channel at the deepest-stage resolution");
  }
  Tensor x = conv2d(seed_map, seed_projection_, 1, 0);
  for (const auto& m : modules_) {
    const Tensor& skip_features = search_pyr.stages[m.skip_stage].features;
    if (skip_features.height() != x.height() || skip_features.width() != x.width()) {
      throw ShapeError("neural refinement: skip stage resolution does not match the cascade");
    }
    Tensor skip = conv2d(skip_features, m.skip_projection, 1, 0);
    auto xd = x.data();
    const auto sd = skip.data();
    for (std::size_t i = 0; i < xd.size(); ++i) xd[i] += sd[i];
    x = conv_transpose2d(relu(x), m.upsample, 2, 1);
  }
  const Tensor probs = softmax_channels(conv2d(x, classifier_, 1, 1));
  if (out_height <= 0 || out_width <= 0 || out_height > probs.height() || out_width > probs.width()) {
    throw ShapeError("neural refinement: requested output extent exceeds the cascade output");
  }
  if (out_height == probs.height() && out_width == probs.width()) return probs;
  Tensor cropped(2, out_height, out_width);
  for (int c = 0; c < 2; ++c) {
    for (int y = 0; y < out_height; ++y) {
      for (int xx = 0; xx < out_width; ++xx) cropped.at(c, y, xx) = probs.at(c, y, xx);
    }
  }
  return cropped;
}

ProbMap refine_neural(const FeaturePyramid& search_pyr, const Tensor& seed_map,
                      const NeuralRefiner& weights, int out_height, int out_width) {
  const Tensor probs = weights.probabilities(search_pyr, seed_map, out_height, out_width);
  ProbMap map(out_height, out_width);
  const auto fg = probs.channel(1);
  std::copy(fg.begin(), fg.end(), map.values.begin());
  return map;
}

namespace {

int colour_bin(const Tensor& img, int y, int x, int bins) {
  int index = 0;
  for (int c = 0; c < img.channels(); ++c) {
    const int b = std::clamp(static_cast<int>(img.at(c, y, x) * bins), 0, bins - 1);
    index = index * bins + b;
  }
  return index;
}

bool centre_inside(const AxisBox& box, int y, int x) {
  const double cx = x + 0.5;
  const double cy = y + 0.5;
  return cx >= box.x0 && cx < box.x1 && cy >= box.y0 && cy < box.y1;
}

}  // namespace

ProbMap segment_histogram(const Tensor& template_patch, const AxisBox& template_fg,
                          const Tensor& search_patch, const AxisBox& detected,
                          const SegConfig& cfg) {
  cfg.validate();
  if (template_patch.channels() != search_patch.channels()) {
    throw ShapeError("segment_histogram: template and search differ in channel count");
  }
  const int bins = cfg.histogram_bins;
  std::size_t total_bins = 1;
  for (int c = 0; c < template_patch.channels(); ++c) total_bins *= static_cast<std::size_t>(bins);

  std::vector<double> fg(total_bins, 0.0);
  std::vector<double> bg(total_bins, 0.0);
  double n_fg = 0.0;
  double n_bg = 0.0;
  for (int y = 0; y < template_patch.height(); ++y) {
    for (int x = 0; x < template_patch.width(); ++x) {
      const int b = colour_bin(template_patch, y, x, bins);
      if (centre_inside(template_fg, y, x)) {
        fg[b] += 1.0;
        n_fg += 1.0;
      } else {
        bg[b] += 1.0;
        n_bg += 1.0;
      }
    }
  }
  if (n_fg == 0.0) throw ArgumentError("segment_histogram: empty foreground region");

  const double nb = static_cast<double>(total_bins);
  std::vector<float> posterior(total_bins);
  for (std::size_t b = 0; b < total_bins; ++b) {
    const double hf = (fg[b] + 1.0) / (n_fg + nb);
    const double hb = (bg[b] + 1.0) / (n_bg + nb);
    posterior[b] = static_cast<float>(hf / (hf + hb));
  }

  const double mx = cfg.box_margin * detected.width();
  const double my = cfg.box_margin * detected.height();
  const AxisBox gate{detected.x0 - mx, detected.y0 - my, detected.x1 + mx, detected.y1 + my};
  ProbMap map(search_patch.height(), search_patch.width());
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (!centre_inside(gate, y, x)) continue;
      map.at(y, x) = posterior[colour_bin(search_patch, y, x, bins)];
    }
  }
  return map;
}

Mask binarize(const ProbMap& p, double threshold) {
  Mask m(p.height, p.width);
  for (std::size_t i = 0; i < p.values.size(); ++i) m.bits[i] = p.values[i] > threshold ? 1 : 0;
  return m;
}

Mask largest_component(const Mask& m) {
  std::vector<int> label(m.bits.size(), -1);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> best_pixels;
  std::vector<std::size_t> pixels;
  int next = 0;
  for (std::size_t start = 0; start < m.bits.size(); ++start) {
    if (!m.bits[start] || label[start] >= 0) continue;
    pixels.clear();
    stack.assign(1, start);
    label[start] = next;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      pixels.push_back(p);
      const int y = static_cast<int>(p / m.width);
      const int x = static_cast<int>(p % m.width);
      const int ny[4] = {y - 1, y + 1, y, y};
      const int nx[4] = {x, x, x - 1, x + 1};
      for (int k = 0; k < 4; ++k) {
        if (ny[k] < 0 || nx[k] < 0 || ny[k] >= m.height || nx[k] >= m.width) continue;
        const std::size_t q = static_cast<std::size_t>(ny[k]) * m.width + nx[k];
        if (m.bits[q] && label[q] < 0) {
          label[q] = next;
          stack.push_back(q);
        }
      }
    }
    ++next;
    if (pixels.size() > best_pixels.size()) best_pixels = pixels;
  }
  Mask out(m.height, m.width);
  for (std::size_t p : best_pixels) out.bits[p] = 1;
  return out;
}

}  // namespace duotrack
