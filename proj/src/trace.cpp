#include "duotrack/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "duotrack/errors.hpp"

namespace duotrack {

std::string trace_violation(const RunTrace& trace) {
  if (trace.frames.empty()) return "empty trace";
  if (trace.frames.front().status != FrameStatus::init) return "frame 0 is not Init";
  bool after_failure = false;
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const auto& f = trace.frames[i];
    switch (f.status) {
      case FrameStatus::init:
        after_failure = false;
        break;
      case FrameStatus::failed:
        if (after_failure) return "frame " + std::to_string(i) + ": Failed while skipping";
        after_failure = true;
        break;
      case FrameStatus::skipped:
        if (!after_failure) return "frame " + std::to_string(i) + ": Skipped without a preceding failure";
        break;
      case FrameStatus::tracked:
        if (after_failure) return "frame " + std::to_string(i) + ": Tracked before re-initialisation";
        if (f.region.vertices.size() < 3) return "frame " + std::to_string(i) + ": Tracked without a region";
        break;
    }
  }
  return {};
}

void write_trace(std::ostream& out, const RunTrace& trace) {
  for (const auto& f : trace.frames) {
    switch (f.status) {
      case FrameStatus::init:
        out << "1\n";
        break;
      case FrameStatus::skipped:
        out << "0\n";
        break;
      case FrameStatus::failed:
        out << "2\n";
        break;
      case FrameStatus::tracked:
        out << format_polygon(f.region) << '\n';
        break;
    }
  }
}

RunTrace read_trace(std::istream& in, std::string sequence) {
  RunTrace trace{std::move(sequence), {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      const auto values = parse_reals(line);
      if (values.size() == 1) {
        const double code = values[0];
        if (code == 1.0) {
          trace.frames.push_back(FrameRecord::make_init());
        } else if (code == 0.0) {
          trace.frames.push_back(FrameRecord::make_skipped());
        } else if (code == 2.0) {
          trace.frames.push_back(FrameRecord::make_failed());
        } else {
          throw FormatError("unknown status code");
        }
      } else if (values.size() >= 6 && values.size() % 2 == 0) {
        Polygon p;
        for (std::size_t i = 0; i < values.size(); i += 2) p.vertices.push_back({values[i], values[i + 1]});
        trace.frames.push_back(FrameRecord::make_tracked(std::move(p)));
      } else {
        throw FormatError("expected a status code or a polygon");
      }
    } catch (const FormatError& e) {
      throw FormatError("trace " + trace.sequence + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

void save_trace(const std::filesystem::path& path, const RunTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_trace(out, trace);
  if (!out) throw FormatError("failed writing " + path.string());
}

RunTrace load_trace(const std::filesystem::path& path, std::string sequence) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open trace file " + path.string());
  return read_trace(in, std::move(sequence));
}

}  // namespace duotrack
