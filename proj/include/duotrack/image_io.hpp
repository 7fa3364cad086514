#pragma once

#include <cstdint>
#include <filesystem>

#include "duotrack/geometry.hpp"
#include "duotrack/mask.hpp"
#include "duotrack/tensor.hpp"

namespace duotrack {

/// 8-bit code <-> [0, 1] intensity. dequantize(quantize(v)) is the value a
/// PPM round trip reproduces.
std::uint8_t quantize(float v);
inline float dequantize(std::uint8_t q) { return static_cast<float>(q) / 255.0f; }

/// Binary PPM (P6, maxval < 256) as a 3 x H x W tensor in [0, 1].
Tensor read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Tensor& rgb);

/// Binary PGM with maxval 1.
void write_pgm_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_pgm_mask(const std::filesystem::path& path);

/// Outlines a polygon on an RGB frame in place (overlay dumps).
void draw_polygon(Tensor& rgb, const Polygon& polygon, float r, float g, float b);

}  // namespace duotrack
