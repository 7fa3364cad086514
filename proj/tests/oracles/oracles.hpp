#pragma once

// Brute-force reference computations used only by tests. They deliberately
// avoid the library's own kernels and geometry so a shared bug cannot hide.

#include <cstdint>
#include <random>
#include <vector>

#include "duotrack/geometry.hpp"
#include "duotrack/tensor.hpp"

namespace oracle {

/// c x h x w array of doubles.
struct Grid {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Grid(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}
  double& at(int ci, int y, int x) { return v[(static_cast<std::size_t>(ci) * h + y) * w + x]; }
  double at(int ci, int y, int x) const { return v[(static_cast<std::size_t>(ci) * h + y) * w + x]; }
};

Grid to_grid(const duotrack::Tensor& t);

/// Explicitly zero-padded input, then a plain strided window sum.
Grid conv2d(const duotrack::Tensor& input, const duotrack::ConvWeights& w, int stride, int pad);

/// Zero-insertion upsampling, full padding and a flipped-kernel convolution.
Grid conv_transpose2d(const duotrack::Tensor& input, const duotrack::ConvWeights& w, int stride, int pad);
/// Scatter form: every input sample adds its weighted kernel footprint.
Grid conv_transpose2d_scatter(const duotrack::Tensor& input, const duotrack::ConvWeights& w, int stride, int pad);

/// Single-channel response summed over all channels; normalized mode uses
/// two-pass window means and deviations.
Grid cross_correlate(const duotrack::Tensor& t, const duotrack::Tensor& s, duotrack::CorrelationMode mode);
Grid depthwise_correlate(const duotrack::Tensor& t, const duotrack::Tensor& s, duotrack::CorrelationMode mode);

double max_abs_diff(const Grid& expected, const duotrack::Tensor& actual);

/// Area of the bounding rectangle of `pts` when rotated by -theta.
double bounding_area_at(const std::vector<duotrack::Point>& pts, double theta);

/// Minimum bounding-rectangle area from a 0.05 degree sweep over [0, 90)
/// followed by repeated local sweeps around the best candidates.
struct SweepResult {
  double coarse_area = 0.0;   // best area on the 0.05 degree grid
  double refined_area = 0.0;  // after local refinement
};
SweepResult sweep_min_area(const std::vector<duotrack::Point>& pts);

bool point_in_polygon(const duotrack::Polygon& p, double x, double y);

/// IoU estimate from `samples` uniform points in the joint bounding box.
double iou_monte_carlo(const duotrack::Polygon& a, const duotrack::Polygon& b, int samples, std::uint64_t seed);

duotrack::Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w, double lo = -1.0, double hi = 1.0);
duotrack::ConvWeights random_weights(std::mt19937_64& rng, int out, int in, int k);

}  // namespace oracle
