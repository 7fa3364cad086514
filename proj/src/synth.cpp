#include <cmath>
#include <numbers>

#include "duotrack/dataset.hpp"
#include "duotrack/errors.hpp"
#include "duotrack/image_io.hpp"
#include "seeded.hpp"

namespace duotrack {

namespace {

// Half extents of the target's axis-aligned footprint used for border
// reflection; a rotating target reserves its half diagonal.
std::pair<double, double> reflection_extent(const SynthConfig& cfg) {
  if (cfg.rotation != 0.0) {
    const double r = 0.5 * std::hypot(cfg.target_width, cfg.target_height);
    return {r, r};
  }
  return {0.5 * cfg.target_width, 0.5 * cfg.target_height};
}

void reflect(double& pos, double& vel, double extent, double limit) {
  if (pos - extent < 0.0) {
    pos = 2.0 * extent - pos;
    vel = -vel;
  } else if (pos + extent > limit) {
    pos = 2.0 * (limit - extent) - pos;
    vel = -vel;
  }
}

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : uniform_(seed) {}

  // Box-Muller on the portable uniform source.
  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_.unit();
    while (u1 <= 0.0) u1 = uniform_.unit();
    const double u2 = uniform_.unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  detail::SeededUniform uniform_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

void SynthConfig::validate() const {
  if (frames < 1) throw ConfigError("synth: frames must be >= 1");
  if (width < 1 || height < 1) throw ConfigError("synth: image size must be positive");
  if (target_width < 1 || target_height < 1) throw ConfigError("synth: target size must be positive");
  if (texel < 1) throw ConfigError("synth: texel must be >= 1");
  if (noise < 0.0) throw ConfigError("synth: noise sigma must be non-negative");
  if (background < 0.0 || background > 1.0) throw ConfigError("synth: background must lie in [0, 1]");
  const auto [ex, ey] = reflection_extent(*this);
  const double cx = start_x < 0.0 ? 0.5 * width : start_x;
  const double cy = start_y < 0.0 ? 0.5 * height : start_y;
  if (cx - ex < 0.0 || cx + ex > width || cy - ey < 0.0 || cy + ey > height) {
    throw ConfigError("synth: target does not fit inside the image at its start position");
  }
}

Sequence synth_sequence(const SynthConfig& cfg, std::string name, RegionFormat format) {
  cfg.validate();
  detail::SeededUniform texture_rng(cfg.seed);
  Gaussian noise_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  const int tex_w = (cfg.target_width + cfg.texel - 1) / cfg.texel;
  const int tex_h = (cfg.target_height + cfg.texel - 1) / cfg.texel;
  Tensor texture(3, tex_h, tex_w);
  for (float& v : texture.data()) v = dequantize(quantize(static_cast<float>(texture_rng.unit())));

  const auto [ex, ey] = reflection_extent(cfg);
  double cx = cfg.start_x < 0.0 ? 0.5 * cfg.width : cfg.start_x;
  double cy = cfg.start_y < 0.0 ? 0.5 * cfg.height : cfg.start_y;
  double vx = cfg.velocity_x;
  double vy = cfg.velocity_y;
  const float bg = dequantize(quantize(static_cast<float>(cfg.background)));

  std::vector<Tensor> frames;
  std::vector<Polygon> gt;
  for (int k = 0; k < cfg.frames; ++k) {
    if (k > 0) {
      cx += vx;
      cy += vy;
      reflect(cx, vx, ex, cfg.width);
      reflect(cy, vy, ey, cfg.height);
    }
    const double angle = cfg.rotation * k;
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    const double hw = 0.5 * cfg.target_width;
    const double hh = 0.5 * cfg.target_height;

    Tensor frame(3, cfg.height, cfg.width);
    for (int y = 0; y < cfg.height; ++y) {
      for (int x = 0; x < cfg.width; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const double u = dx * ca + dy * sa;
        const double v = -dx * sa + dy * ca;
        if (u >= -hw && u < hw && v >= -hh && v < hh) {
          const int tx = std::min(tex_w - 1, static_cast<int>((u + hw) / cfg.texel));
          const int ty = std::min(tex_h - 1, static_cast<int>((v + hh) / cfg.texel));
          for (int c = 0; c < 3; ++c) frame.at(c, y, x) = texture.at(c, ty, tx);
        } else if (cfg.noise > 0.0) {
          for (int c = 0; c < 3; ++c) {
            frame.at(c, y, x) = dequantize(quantize(static_cast<float>(bg + cfg.noise * noise_rng.next())));
          }
        } else {
          for (int c = 0; c < 3; ++c) frame.at(c, y, x) = bg;
        }
      }
    }
    frames.push_back(std::move(frame));

    const RotatedBox box{{cx, cy}, double(cfg.target_width), double(cfg.target_height), angle};
    Polygon region = angle == 0.0 ? axis_to_polygon(AxisBox::from_center({cx, cy}, cfg.target_width,
                                                                          cfg.target_height))
                                  : box.to_polygon();
    if (format == RegionFormat::got_xywh) region = axis_to_polygon(polygon_to_axis(region));
    gt.push_back(std::move(region));
  }
  return Sequence(std::move(name), format, std::move(frames), std::move(gt));
}

Sequence write_synth_sequence(const SynthConfig& cfg, const std::filesystem::path& out_dir, RegionFormat format) {
  Sequence seq = synth_sequence(cfg, out_dir.filename().string(), format);
  write_sequence(seq, out_dir);
  return seq;
}

}  // namespace duotrack
