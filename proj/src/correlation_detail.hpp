#pragma once

// Shared pieces of the correlation kernels (shape checks and the
// normalization used by CorrelationMode::normalized). Internal header.

#include <vector>

#include "duotrack/tensor.hpp"

namespace duotrack::detail {

void check_correlation_shapes(const Tensor& template_feat, const Tensor& search_feat);

/// Template with its mean over channels [c0, c1) removed, plus the L2 norm of
/// the centered values.
struct CenteredTemplate {
  Tensor values;
  double norm = 0.0;
};

CenteredTemplate center_template(const Tensor& template_feat, int c0, int c1);

/// Per-window sums of s and s^2 over channels [c0, c1) and the template
/// footprint, via summed-area tables.
struct WindowStats {
  int height = 0;
  int width = 0;
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

WindowStats window_stats(const Tensor& search_feat, int c0, int c1, int template_h,
                         int template_w);

/// Converts centered-template numerators into normalized correlation values
/// in place.
void normalize_response(std::span<float> response, const WindowStats& stats,
                        double template_norm, double n);

}  // namespace duotrack::detail
