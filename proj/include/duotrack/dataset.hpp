#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "duotrack/geometry.hpp"
#include "duotrack/tensor.hpp"

namespace duotrack {

enum class RegionFormat {
  vot_polygon,  // 8 reals per line, or x,y,w,h promoted to a rectangle
  got_xywh,     // x,y,w,h per line
};

RegionFormat parse_region_format(std::string_view name);
std::string_view region_format_name(RegionFormat f);

/// Ordered frames with one ground-truth region per frame. Frames come either
/// from PPM files (read on demand) or from memory.
class Sequence {
 public:
  Sequence() = default;
  Sequence(std::string name, RegionFormat format, std::vector<Tensor> frames, std::vector<Polygon> gt);
  Sequence(std::string name, RegionFormat format, std::vector<std::filesystem::path> frame_files,
           std::vector<Polygon> gt);

  const std::string& name() const { return name_; }
  RegionFormat format() const { return format_; }
  std::size_t size() const { return gt_.size(); }
  const std::vector<Polygon>& ground_truth() const { return gt_; }
  bool in_memory() const { return !frames_.empty(); }

  Tensor frame(std::size_t index) const;

 private:
  std::string name_;
  RegionFormat format_ = RegionFormat::vot_polygon;
  std::vector<Tensor> frames_;
  std::vector<std::filesystem::path> frame_files_;
  std::vector<Polygon> gt_;
};

inline constexpr std::string_view kGroundTruthFile = "groundtruth.txt";

/// Reads `dir`/groundtruth.txt and the *.ppm frames in lexicographic order.
Sequence load_sequence(const std::filesystem::path& dir, RegionFormat format);

/// Sequence directories of a dataset: `root` itself if it holds a
/// groundtruth file, otherwise its subdirectories that do, sorted by name.
std::vector<std::filesystem::path> list_sequences(const std::filesystem::path& root);

/// Writes frames as 00000001.ppm, ... and the groundtruth file in the
/// sequence's region format.
void write_sequence(const Sequence& seq, const std::filesystem::path& dir);

/// Moving textured rectangle over a flat, optionally noisy, background.
struct SynthConfig {
  int frames = 50;
  int width = 128;
  int height = 128;
  int target_width = 24;
  int target_height = 24;
  double start_x = -1.0;  // initial target centre; negative means image centre
  double start_y = -1.0;
  double velocity_x = 2.0;
  double velocity_y = 0.0;
  double rotation = 0.0;  // rad / frame
  double noise = 0.0;     // background Gaussian sigma, intensity units
  double background = 0.5;
  int texel = 4;  // texture cell size in pixels
  std::uint64_t seed = 1;

  void validate() const;
};

/// Deterministic in-memory sequence. Intensities are already quantised to
/// 8 bits, so writing and reloading reproduces it exactly.
Sequence synth_sequence(const SynthConfig& cfg, std::string name,
                        RegionFormat format = RegionFormat::vot_polygon);
Sequence write_synth_sequence(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                        RegionFormat format = RegionFormat::vot_polygon);

}  // namespace duotrack
