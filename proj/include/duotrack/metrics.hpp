#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "duotrack/geometry.hpp"
#include "duotrack/trace.hpp"

namespace duotrack {

struct EvalConfig {
  int burn_in = 10;    // tracked frames ignored by accuracy after every Init
  int reinit_gap = 5;  // Skipped frames after a failure (supervised runs)
  std::optional<std::pair<int, int>> eao_interval;  // derived from the dataset when unset
  std::vector<double> sr_thresholds{0.5, 0.75};

  void validate() const;
};

/// A trace scored against its ground truth. Overlap is empty for Init and
/// Skipped frames, 0 for Failed frames and the polygon IoU for Tracked ones.
struct FrameOverlaps {
  std::vector<FrameStatus> status;
  std::vector<std::optional<double>> overlap;

  std::size_t size() const { return status.size(); }
};

struct Robustness {
  std::size_t failures = 0;
  double per_frame = 0.0;
};

struct VotScores {
  double accuracy = 0.0;
  std::size_t robustness_failures = 0;
  double robustness_per_frame = 0.0;
  double eao = 0.0;
  std::pair<int, int> eao_interval{0, 0};
};

struct GotScores {
  double ao = 0.0;
  std::vector<std::pair<double, double>> sr;  // (threshold, rate)
};

FrameOverlaps frame_overlaps(const RunTrace& trace, std::span<const Polygon> gt);

/// Frame-pooled mean overlap of Tracked frames, skipping the first burn_in
/// frames after every Init. Throws ArgumentError when nothing is left.
double accuracy(std::span<const FrameOverlaps> runs, const EvalConfig& cfg);

Robustness robustness(std::span<const FrameOverlaps> runs);

/// Overlap curves of the sub-runs: one per Init, running until and including
/// the next failure or the end of the trace.
std::vector<std::vector<double>> eao_subruns(const FrameOverlaps& run);

/// Mean over N in [lo, hi] of the mean over sub-runs of the first N values of
/// each zero-extended curve.
double expected_average_overlap(std::span<const std::vector<double>> subruns, int lo, int hi);
double eao(std::span<const FrameOverlaps> runs, std::pair<int, int> interval);

/// [floor(0.5 m), ceil(1.5 m)] for the median sequence length m, lower end at least 1.
std::pair<int, int> default_eao_interval(std::span<const std::size_t> sequence_lengths);

/// Mean overlap over the frames after the first one (lost target counts 0).
double average_overlap(const FrameOverlaps& run);
/// Fraction of frames after the first one with overlap strictly above tau.
double success_rate(const FrameOverlaps& run, double tau);

VotScores vot_scores(std::span<const FrameOverlaps> runs, const EvalConfig& cfg);
GotScores got_scores(std::span<const FrameOverlaps> runs, const EvalConfig& cfg);

/// "metric=value" report lines, followed by the configuration echo.
void write_report(std::ostream& out, const VotScores& s, const EvalConfig& cfg, std::size_t sequences);
void write_report(std::ostream& out, const GotScores& s, const EvalConfig& cfg, std::size_t sequences);

}  // namespace duotrack
