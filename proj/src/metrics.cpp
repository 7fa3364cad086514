#include "duotrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "duotrack/errors.hpp"

namespace duotrack {

void EvalConfig::validate() const {
  if (burn_in < 0) throw ConfigError("burn_in must be non-negative");
  if (reinit_gap < 0) throw ConfigError("reinit_gap must be non-negative");
  if (eao_interval) {
    const auto [lo, hi] = *eao_interval;
    if (lo < 1 || lo > hi) throw ConfigError("eao interval needs 1 <= lo <= hi");
  }
  for (double t : sr_thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("success-rate thresholds must lie in [0, 1]");
  }
}

FrameOverlaps frame_overlaps(const RunTrace& trace, std::span<const Polygon> gt) {
  if (gt.size() != trace.frames.size()) {
    throw ArgumentError("trace " + trace.sequence + " has " + std::to_string(trace.frames.size()) +
                        " frames but ground truth has " + std::to_string(gt.size()));
  }
  FrameOverlaps out;
  out.status.reserve(gt.size());
  out.overlap.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& f = trace.frames[i];
    out.status.push_back(f.status);
    switch (f.status) {
      case FrameStatus::tracked:
        out.overlap.emplace_back(iou_polygon(f.region, gt[i]));
        break;
      case FrameStatus::failed:
        out.overlap.emplace_back(0.0);
        break;
      default:
        out.overlap.emplace_back(std::nullopt);
        break;
    }
  }
  return out;
}

double accuracy(std::span<const FrameOverlaps> runs, const EvalConfig& cfg) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& run : runs) {
    std::ptrdiff_t last_init = -1;
    for (std::size_t i = 0; i < run.size(); ++i) {
      if (run.status[i] == FrameStatus::init) {
        last_init = static_cast<std::ptrdiff_t>(i);
        continue;
      }
      if (run.status[i] != FrameStatus::tracked) continue;
      if (last_init >= 0 && static_cast<std::ptrdiff_t>(i) - last_init <= cfg.burn_in) continue;
      sum += run.overlap[i].value_or(0.0);
      ++count;
    }
  }
  if (count == 0) throw ArgumentError("accuracy undefined: no tracked frames after burn-in");
  return sum / static_cast<double>(count);
}

Robustness robustness(std::span<const FrameOverlaps> runs) {
  Robustness r;
  std::size_t frames = 0;
  for (const auto& run : runs) {
    frames += run.size();
    r.failures += static_cast<std::size_t>(std::count(run.status.begin(), run.status.end(), FrameStatus::failed));
  }
  r.per_frame = frames == 0 ? 0.0 : static_cast<double>(r.failures) / static_cast<double>(frames);
  return r;
}

std::vector<std::vector<double>> eao_subruns(const FrameOverlaps& run) {
  std::vector<std::vector<double>> subruns;
  bool open = false;
  for (std::size_t i = 0; i < run.size(); ++i) {
    switch (run.status[i]) {
      case FrameStatus::init:
        subruns.emplace_back();
        open = true;
        break;
      case FrameStatus::tracked:
        if (open) subruns.back().push_back(run.overlap[i].value_or(0.0));
        break;
      case FrameStatus::failed:
        if (open) subruns.back().push_back(0.0);
        open = false;
        break;
      case FrameStatus::skipped:
        break;
    }
  }
  return subruns;
}

double expected_average_overlap(std::span<const std::vector<double>> subruns, int lo, int hi) {
  if (subruns.empty()) throw ArgumentError("eao: no sub-runs");
  if (lo < 1 || lo > hi) throw ArgumentError("eao: interval needs 1 <= lo <= hi");
  double total = 0.0;
  for (int n = lo; n <= hi; ++n) {
    double over_runs = 0.0;
    for (const auto& curve : subruns) {
      double s = 0.0;
      const std::size_t take = std::min<std::size_t>(curve.size(), static_cast<std::size_t>(n));
      for (std::size_t k = 0; k < take; ++k) s += curve[k];
      over_runs += s / n;
    }
    total += over_runs / static_cast<double>(subruns.size());
  }
  return total / static_cast<double>(hi - lo + 1);
}

double eao(std::span<const FrameOverlaps> runs, std::pair<int, int> interval) {
  std::vector<std::vector<double>> all;
  for (const auto& run : runs) {
    auto s = eao_subruns(run);
    all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return expected_average_overlap(all, interval.first, interval.second);
}

std::pair<int, int> default_eao_interval(std::span<const std::size_t> sequence_lengths) {
  if (sequence_lengths.empty()) throw ArgumentError("eao interval: no sequences");
  std::vector<std::size_t> sorted(sequence_lengths.begin(), sequence_lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1
                            ? static_cast<double>(sorted[mid])
                            : 0.5 * (static_cast<double>(sorted[mid - 1]) + static_cast<double>(sorted[mid]));
  const int lo = std::max(1, static_cast<int>(std::floor(0.5 * median)));
  const int hi = std::max(lo, static_cast<int>(std::ceil(1.5 * median)));
  return {lo, hi};
}

namespace {

template <typename Fn>
double mean_after_first(const FrameOverlaps& run, Fn&& value) {
  if (run.size() < 2) throw ArgumentError("need at least one frame after initialisation");
  double sum = 0.0;
  for (std::size_t i = 1; i < run.size(); ++i) {
    sum += value(run.status[i] == FrameStatus::tracked ? run.overlap[i].value_or(0.0) : 0.0);
  }
  return sum / static_cast<double>(run.size() - 1);
}

}  // namespace

double average_overlap(const FrameOverlaps& run) {
  return mean_after_first(run, [](double o) { return o; });
}

double success_rate(const FrameOverlaps& run, double tau) {
  return mean_after_first(run, [tau](double o) { return o > tau ? 1.0 : 0.0; });
}

VotScores vot_scores(std::span<const FrameOverlaps> runs, const EvalConfig& cfg) {
  cfg.validate();
  VotScores s;
  s.accuracy = accuracy(runs, cfg);
  const auto r = robustness(runs);
  s.robustness_failures = r.failures;
  s.robustness_per_frame = r.per_frame;
  if (cfg.eao_interval) {
    s.eao_interval = *cfg.eao_interval;
  } else {
    std::vector<std::size_t> lengths;
    for (const auto& run : runs) lengths.push_back(run.size());
    s.eao_interval = default_eao_interval(lengths);
  }
  s.eao = eao(runs, s.eao_interval);
  return s;
}

GotScores got_scores(std::span<const FrameOverlaps> runs, const EvalConfig& cfg) {
  cfg.validate();
  if (runs.empty()) throw ArgumentError("got scores: no sequences");
  GotScores s;
  double ao = 0.0;
  for (const auto& run : runs) ao += average_overlap(run);
  s.ao = ao / static_cast<double>(runs.size());
  for (double tau : cfg.sr_thresholds) {
    double sr = 0.0;
    for (const auto& run : runs) sr += success_rate(run, tau);
    s.sr.emplace_back(tau, sr / static_cast<double>(runs.size()));
  }
  return s;
}

void write_report(std::ostream& out, const VotScores& s, const EvalConfig& cfg, std::size_t sequences) {
  out << "protocol=vot\n";
  out << "sequences=" << sequences << '\n';
  out << "accuracy=" << format_real(s.accuracy) << '\n';
  out << "robustness_failures=" << s.robustness_failures << '\n';
  out << "robustness_per_frame=" << format_real(s.robustness_per_frame) << '\n';
  out << "eao=" << format_real(s.eao) << '\n';
  out << "config.burn_in=" << cfg.burn_in << '\n';
  out << "config.reinit_gap=" << cfg.reinit_gap << '\n';
  out << "config.eao_interval=" << s.eao_interval.first << ',' << s.eao_interval.second << '\n';
}

void write_report(std::ostream& out, const GotScores& s, const EvalConfig& cfg, std::size_t sequences) {
  out << "protocol=got\n";
  out << "sequences=" << sequences << '\n';
  out << "ao=" << format_real(s.ao) << '\n';
  for (const auto& [tau, rate] : s.sr) out << "sr@" << format_real(tau) << '=' << format_real(rate) << '\n';
  out << "config.sr_thresholds=";
  for (std::size_t i = 0; i < cfg.sr_thresholds.size(); ++i) {
    out << (i ? "," : "") << format_real(cfg.sr_thresholds[i]);
  }
  out << '\n';
}

}  // namespace duotrack
