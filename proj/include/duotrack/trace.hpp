#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "duotrack/geometry.hpp"

namespace duotrack {

enum class FrameStatus { init, tracked, failed, skipped };

struct FrameRecord {
  FrameStatus status = FrameStatus::init;
  Polygon region;  // set for tracked frames only

  static FrameRecord make_init() { return {FrameStatus::init, {}}; }
  static FrameRecord make_tracked(Polygon p) { return {FrameStatus::tracked, std::move(p)}; }
  static FrameRecord make_failed() { return {FrameStatus::failed, {}}; }
  static FrameRecord make_skipped() { return {FrameStatus::skipped, {}}; }

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

/// Per-frame record of one tracking run over a sequence.
struct RunTrace {
  std::string sequence;
  std::vector<FrameRecord> frames;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// Frame 0 is Init, and a Failed record is followed only by Skipped records
/// until the next Init or the end of the trace. Returns an empty string when
/// valid, otherwise the first violation.
std::string trace_violation(const RunTrace& trace);
inline bool trace_is_valid(const RunTrace& trace) { return trace_violation(trace).empty(); }

// Trace text format, one line per frame: "1" Init, "0" Skipped, "2" Failed,
// or the tracked polygon as comma-separated reals.
void write_trace(std::ostream& out, const RunTrace& trace);
RunTrace read_trace(std::istream& in, std::string sequence);
void save_trace(const std::filesystem::path& path, const RunTrace& trace);
RunTrace load_trace(const std::filesystem::path& path, std::string sequence);

}  // namespace duotrack
