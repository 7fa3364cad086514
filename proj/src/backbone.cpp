#include "duotrack/backbone.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "duotrack/errors.hpp"
#include "seeded.hpp"

namespace duotrack {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'T', 'B', 'W'};
constexpr std::uint32_t kVersion = 1;
constexpr int kStageKernel = 3;

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint64_t get_uint(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("weights file truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

float get_f32(std::istream& in) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(get_uint(in, 4)));
}

}  // namespace

BackboneConfig BackboneConfig::identity() {
  BackboneConfig c;
  c.kind = BackboneKind::identity;
  c.stage_channels = {3};
  c.stage_strides = {1};
  c.total_stride = 1;
  return c;
}

BackboneConfig BackboneConfig::layout(std::string_view name, std::uint64_t seed) {
  BackboneConfig c;
  c.seed = seed;
  if (name == "default") {
    c.stage_channels = {16, 32, 64, 64};
    c.stage_strides = {2, 2, 2, 1};
  } else if (name == "slim") {
    c.stage_channels = {8, 16, 32};
    c.stage_strides = {2, 2, 2};
  } else if (name == "wide") {
    c.stage_channels = {16, 32, 48, 64, 64};
    c.stage_strides = {2, 2, 2, 1, 1};
  } else {
    throw ConfigError("unknown backbone layout '" + std::string(name) + "'");
  }
  c.total_stride = 8;
  return c;
}

void BackboneConfig::validate() const {
  if (stage_channels.empty()) throw ConfigError("backbone needs at least one stage");
  if (stage_channels.size() != stage_strides.size()) {
    throw ConfigError("backbone stage_channels and stage_strides differ in length");
  }
  int product = 1;
  for (std::size_t i = 0; i < stage_channels.size(); ++i) {
    if (stage_channels[i] <= 0) throw ConfigError("backbone stage with zero channels");
    if (stage_strides[i] <= 0) throw ConfigError("backbone stage with non-positive stride");
    product *= stage_strides[i];
  }
  if (total_stride <= 0 || !std::has_single_bit(static_cast<unsigned>(total_stride))) {
    throw ConfigError("backbone total_stride must be a power of two");
  }
  if (product != total_stride) {
    throw ConfigError("backbone total_stride " + std::to_string(total_stride) +
                      " differs from product of stage strides " + std::to_string(product));
  }
  if (kind == BackboneKind::identity &&
      (total_stride != 1 || stage_channels.size() != 1 || stage_channels[0] != 3)) {
    throw ConfigError("identity backbone requires a single 3-channel stage at stride 1");
  }
}

const FeatureStage* FeaturePyramid::find_stride(int stride) const {
  for (const auto& stage : stages) {
    if (stage.stride == stride) return &stage;
  }
  return nullptr;
}

Backbone::Backbone(BackboneConfig config) : config_(std::move(config)) {
  config_.validate();
  if (config_.kind == BackboneKind::identity) return;
  detail::SeededUniform rng(config_.seed);
  int in_ch = 3;
  for (int out_ch : config_.stage_channels) {
    weights_.push_back(detail::seeded_conv(rng, out_ch, in_ch, kStageKernel));
    in_ch = out_ch;
  }
}

Backbone::Backbone(BackboneConfig config, std::vector<ConvWeights> weights)
    : config_(std::move(config)), weights_(std::move(weights)) {}

FeaturePyramid Backbone::extract(const Tensor& patch) const {
  if (patch.channels() != 3) {
    throw ShapeError("backbone expects a 3-channel patch, got " + std::to_string(patch.channels()));
  }
  FeaturePyramid pyramid;
  if (config_.kind == BackboneKind::identity) {
    pyramid.stages.push_back({patch, 1});
    return pyramid;
  }
  const Tensor* current = &patch;
  int stride = 1;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    stride *= config_.stage_strides[i];
    pyramid.stages.push_back(
        {relu(conv2d(*current, weights_[i], config_.stage_strides[i], kStageKernel / 2)), stride});
    current = &pyramid.stages.back().features;
  }
  return pyramid;
}

void Backbone::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, kVersion);
  put_u32(out, config_.kind == BackboneKind::identity ? 0u : 1u);
  put_u32(out, static_cast<std::uint32_t>(config_.stage_channels.size()));
  for (std::size_t i = 0; i < config_.stage_channels.size(); ++i) {
    put_u32(out, static_cast<std::uint32_t>(config_.stage_channels[i]));
    put_u32(out, static_cast<std::uint32_t>(config_.stage_strides[i]));
  }
  put_u64(out, config_.seed);
  for (const auto& w : weights_) {
    for (float v : w.values) put_f32(out, v);
    for (float v : w.bias) put_f32(out, v);
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

Backbone Backbone::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open weights file " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError(path.string() + ": not a backbone weights file");
  if (get_uint(in, 4) != kVersion) throw FormatError(path.string() + ": unsupported version");

  BackboneConfig config;
  const auto kind = get_uint(in, 4);
  if (kind > 1) throw FormatError(path.string() + ": unknown backbone kind");
  config.kind = kind == 0 ? BackboneKind::identity : BackboneKind::conv;
  const auto stages = get_uint(in, 4);
  if (stages == 0 || stages > 64) throw FormatError(path.string() + ": bad stage count");
  config.stage_channels.clear();
  config.stage_strides.clear();
  config.total_stride = 1;
  for (std::uint64_t i = 0; i < stages; ++i) {
    config.stage_channels.push_back(static_cast<int>(get_uint(in, 4)));
    config.stage_strides.push_back(static_cast<int>(get_uint(in, 4)));
    config.total_stride *= config.stage_strides.back();
  }
  config.seed = get_uint(in, 8);
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  std::vector<ConvWeights> weights;
  if (config.kind == BackboneKind::conv) {
    int in_ch = 3;
    for (int out_ch : config.stage_channels) {
      ConvWeights w(out_ch, in_ch, kStageKernel);
      for (float& v : w.values) v = get_f32(in);
      for (float& v : w.bias) v = get_f32(in);
      weights.push_back(std::move(w));
      in_ch = out_ch;
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after weights");
  }
  return Backbone(std::move(config), std::move(weights));
}

Backbone build_backbone(const BackboneConfig& config) { return Backbone(config); }

FeaturePyramid extract_features(const Backbone& backbone, const Tensor& patch) {
  return backbone.extract(patch);
}

Tensor aggregate_multilayer(std::span<const Tensor> responses) {
  if (responses.empty()) throw ArgumentError("aggregate_multilayer: empty response list");
  if (responses.size() == 1) return responses.front();
  for (const auto& r : responses) {
    if (!r.same_shape(responses.front())) {
      throw ShapeError("aggregate_multilayer: responses differ in shape");
    }
  }
  Tensor out(responses.front().channels(), responses.front().height(), responses.front().width());
  auto dst = out.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    double acc = 0.0;
    for (const auto& r : responses) acc += r.data()[p];
    dst[p] = static_cast<float>(acc / static_cast<double>(responses.size()));
  }
  return out;
}

}  // namespace duotrack
