#include "duotrack/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "duotrack/errors.hpp"
#include "duotrack/image_io.hpp"

namespace fs = std::filesystem;

namespace duotrack {

RegionFormat parse_region_format(std::string_view name) {
  if (name == "vot" || name == "vot_polygon") return RegionFormat::vot_polygon;
  if (name == "got" || name == "got_xywh") return RegionFormat::got_xywh;
  throw ConfigError("unknown region format '" + std::string(name) + "'");
}

std::string_view region_format_name(RegionFormat f) {
  return f == RegionFormat::vot_polygon ? "vot" : "got";
}

Sequence::Sequence(std::string name, RegionFormat format, std::vector<Tensor> frames,
                   std::vector<Polygon> gt)
    : name_(std::move(name)), format_(format), frames_(std::move(frames)), gt_(std::move(gt)) {
  if (frames_.size() != gt_.size()) throw FormatError("sequence " + name_ + ": frame/groundtruth count mismatch");
}

Sequence::Sequence(std::string name, RegionFormat format, std::vector<fs::path> frame_files,
                   std::vector<Polygon> gt)
    : name_(std::move(name)), format_(format), frame_files_(std::move(frame_files)), gt_(std::move(gt)) {
  if (frame_files_.size() != gt_.size()) {
    throw FormatError("sequence " + name_ + ": frame/groundtruth count mismatch");
  }
}

Tensor Sequence::frame(std::size_t index) const {
  if (index >= size()) throw ArgumentError("frame index out of range");
  if (!frames_.empty()) return frames_[index];
  return read_ppm(frame_files_[index]);
}

Sequence load_sequence(const fs::path& dir, RegionFormat format) {
  const fs::path gt_path = dir / kGroundTruthFile;
  std::ifstream in(gt_path);
  if (!in) throw FormatError(dir.string() + ": missing " + std::string(kGroundTruthFile));

  std::vector<Polygon> gt;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      Polygon p = format == RegionFormat::vot_polygon ? parse_region(line) : axis_to_polygon(parse_xywh(line));
      if (polygon_area(p) <= 0.0) throw FormatError("zero-area region");
      gt.push_back(std::move(p));
    } catch (const FormatError& e) {
      throw FormatError(gt_path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (frames.size() != gt.size()) {
    throw FormatError(gt_path.string() + " line " + std::to_string(std::min(frames.size(), gt.size()) + 1) +
                      ": " + std::to_string(frames.size()) + " frames but " + std::to_string(gt.size()) +
                      " groundtruth lines");
  }
  return Sequence(dir.filename().string(), format, std::move(frames), std::move(gt));
}

std::vector<fs::path> list_sequences(const fs::path& root) {
  if (!fs::is_directory(root)) throw FormatError(root.string() + ": not a directory");
  if (fs::exists(root / kGroundTruthFile)) return {root};
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / kGroundTruthFile)) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw FormatError(root.string() + ": no sequences with a groundtruth file");
  return dirs;
}

void write_sequence(const Sequence& seq, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%08zu.ppm", i + 1);
    write_ppm(dir / name, seq.frame(i));
  }
  std::ofstream out(dir / kGroundTruthFile, std::ios::binary);
  if (!out) throw FormatError("cannot write groundtruth in " + dir.string());
  for (const auto& p : seq.ground_truth()) {
    out << (seq.format() == RegionFormat::vot_polygon ? format_polygon(p) : format_xywh(polygon_to_axis(p)))
        << '\n';
  }
  if (!out) throw FormatError("failed writing groundtruth in " + dir.string());
}

}  // namespace duotrack
