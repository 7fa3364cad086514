#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "criteria.hpp"
#include "duotrack/config.hpp"
#include "duotrack/errors.hpp"
#include "duotrack/image_io.hpp"
#include "duotrack/pipeline.hpp"

namespace fs = std::filesystem;
using namespace duotrack;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Bad flag values; everything else thrown while running is a data error.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  std::vector<double> v;
  try {
    v = parse_reals(text);
  } catch (const FormatError& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
  if (v.size() != 2) throw UsageError(std::string(what) + " expects two comma-separated values");
  return {v[0], v[1]};
}

struct TrackArgs {
  fs::path dataset;
  std::string format = "vot";
  std::string protocol = "supervised";
  std::optional<fs::path> config;
  fs::path out;
  int threads = 1;
  bool dump_overlays = false;
};

void dump_overlay(const fs::path& dir, std::size_t index, Tensor frame, const FrameRecord& record,
                  const Polygon& gt) {
  draw_polygon(frame, gt, 0.0f, 1.0f, 0.0f);
  if (record.status == FrameStatus::tracked) draw_polygon(frame, record.region, 1.0f, 0.0f, 0.0f);
  char name[32];
  std::snprintf(name, sizeof(name), "%08zu.ppm", index + 1);
  write_ppm(dir / name, frame);
}

int run_track(const TrackArgs& args) {
  const RegionFormat format = parse_region_format(args.format);
  if (args.protocol != "supervised" && args.protocol != "oneshot") {
    throw UsageError("protocol must be supervised or oneshot");
  }
  const RunConfig config = args.config ? load_config(*args.config) : RunConfig{};
  const auto dirs = list_sequences(args.dataset);
  fs::create_directories(args.out);

  // Weights are loaded once up front so a bad file fails before any work.
  if (config.tracker.backbone_weights) Backbone::load(*config.tracker.backbone_weights);

  std::vector<std::string> errors(dirs.size());
  const int n = static_cast<int>(dirs.size());
#pragma omp parallel for schedule(dynamic) num_threads(args.threads)
  for (int i = 0; i < n; ++i) {
    try {
      const Sequence seq = load_sequence(dirs[i], format);
      TwoStageTracker tracker(config.tracker);
      FrameObserver observer;
      const fs::path overlay_dir = args.out / "overlays" / seq.name();
      if (args.dump_overlays) {
        fs::create_directories(overlay_dir);
        observer = [&](std::size_t k, const Tensor& frame, const FrameRecord& record) {
          dump_overlay(overlay_dir, k, frame, record, seq.ground_truth()[k]);
        };
      }
      const RunTrace trace = args.protocol == "supervised"
                                 ? run_supervised(seq, tracker, config.eval.reinit_gap, observer)
                                 : run_oneshot(seq, tracker, observer);
      save_trace(args.out / (seq.name() + ".txt"), trace);
    } catch (const std::exception& e) {
      errors[i] = dirs[i].string() + ": " + e.what();
    }
  }
  int status = 0;
  for (const auto& e : errors) {
    if (e.empty()) continue;
    std::cerr << "track: " << e << '\n';
    status = kExitData;
  }
  return status;
}

struct EvalArgs {
  fs::path traces;
  fs::path dataset;
  std::string protocol = "vot";
  std::optional<std::string> format;
  std::optional<std::string> eao_interval;
  std::optional<fs::path> config;
  fs::path out;
};

int run_eval(const EvalArgs& args) {
  if (args.protocol != "vot" && args.protocol != "got") throw UsageError("protocol must be vot or got");
  const RegionFormat format = parse_region_format(args.format.value_or(args.protocol));
  EvalConfig cfg = args.config ? load_config(*args.config).eval : EvalConfig{};
  if (args.eao_interval) {
    const auto [lo, hi] = parse_pair(*args.eao_interval, "--eao-interval");
    if (lo != std::floor(lo) || hi != std::floor(hi)) throw UsageError("--eao-interval expects integers");
    cfg.eao_interval = std::pair{static_cast<int>(lo), static_cast<int>(hi)};
  }
  cfg.validate();

  std::vector<FrameOverlaps> runs;
  for (const auto& dir : list_sequences(args.dataset)) {
    const Sequence seq = load_sequence(dir, format);
    const RunTrace trace = load_trace(args.traces / (seq.name() + ".txt"), seq.name());
    if (const auto why = trace_violation(trace); !why.empty()) {
      throw FormatError("trace " + seq.name() + ": " + why);
    }
    runs.push_back(frame_overlaps(trace, seq.ground_truth()));
  }

  if (args.out.has_parent_path()) fs::create_directories(args.out.parent_path());
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw FormatError("cannot write report " + args.out.string());
  if (args.protocol == "vot") {
    write_report(out, vot_scores(runs, cfg), cfg, runs.size());
  } else {
    write_report(out, got_scores(runs, cfg), cfg, runs.size());
  }
  if (!out) throw FormatError("failed writing report " + args.out.string());
  return 0;
}

struct SynthArgs {
  fs::path out;
  int frames = 50;
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::string velocity = "2,0";
  double rotate = 0.0;
  std::string size = "128,128";
  std::string target = "24,24";
  int sequences = 1;
  std::string format = "vot";
};

int run_synth(const SynthArgs& args) {
  const RegionFormat format = parse_region_format(args.format);
  if (args.sequences < 1) throw UsageError("--sequences must be at least 1");
  SynthConfig cfg;
  cfg.frames = args.frames;
  cfg.noise = args.noise;
  cfg.rotation = args.rotate;
  std::tie(cfg.velocity_x, cfg.velocity_y) = parse_pair(args.velocity, "--velocity");
  const auto [w, h] = parse_pair(args.size, "--size");
  const auto [tw, th] = parse_pair(args.target, "--target");
  cfg.width = static_cast<int>(w);
  cfg.height = static_cast<int>(h);
  cfg.target_width = static_cast<int>(tw);
  cfg.target_height = static_cast<int>(th);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  for (int k = 0; k < args.sequences; ++k) {
    cfg.seed = args.seed + static_cast<std::uint64_t>(k);
    char name[32];
    std::snprintf(name, sizeof(name), "synth_%03d", k + 1);
    write_synth_sequence(cfg, args.out / name, format);
  }
  return 0;
}

int run_selftest(const fs::path& self, const fs::path& scratch) {
  acceptance::Options options;
  options.cli = self;
  options.scratch = scratch;
  bool ok = true;
  for (const auto& r : acceptance::run_all(options, std::cout)) ok = ok && r.passed;
  return ok ? 0 : kExitData;
}

fs::path self_path(const char* argv0) {
  std::error_code ec;
  const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  return ec ? fs::absolute(argv0) : exe;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage Siamese tracker with VOT / GOT-10k style evaluation"};
  app.require_subcommand(1);

  TrackArgs track;
  auto* track_cmd = app.add_subcommand("track", "Run the tracker over a dataset and write trace files");
  track_cmd->add_option("--dataset", track.dataset, "Dataset root or single sequence directory")->required();
  track_cmd->add_option("--format", track.format, "Groundtruth format")->check(CLI::IsMember({"vot", "got"}));
  track_cmd->add_option("--protocol", track.protocol, "Run protocol")
      ->check(CLI::IsMember({"supervised", "oneshot"}));
  track_cmd->add_option("--config", track.config, "Flat key = value config file");
  track_cmd->add_option("--out", track.out, "Output directory for traces")->required();
  track_cmd->add_option("--threads", track.threads, "Sequences tracked concurrently")->check(CLI::PositiveNumber);
  track_cmd->add_flag("--dump-overlays", track.dump_overlays, "Write PPM frames with gt and prediction outlines");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score trace files against ground truth");
  eval_cmd->add_option("--traces", eval.traces, "Directory of <sequence>.txt traces")->required();
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset root")->required();
  eval_cmd->add_option("--protocol", eval.protocol, "Metric family")->check(CLI::IsMember({"vot", "got"}));
  eval_cmd->add_option("--format", eval.format, "Groundtruth format (defaults to the protocol)")
      ->check(CLI::IsMember({"vot", "got"}));
  eval_cmd->add_option("--eao-interval", eval.eao_interval, "LO,HI sequence-length interval for EAO");
  eval_cmd->add_option("--config", eval.config, "Config file supplying eval.* keys");
  eval_cmd->add_option("--out", eval.out, "Report file")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset");
  synth_cmd->add_option("--out", synth.out, "Output dataset root")->required();
  synth_cmd->add_option("--frames", synth.frames, "Frames per sequence");
  synth_cmd->add_option("--seed", synth.seed, "Texture and noise seed");
  synth_cmd->add_option("--noise", synth.noise, "Background noise sigma");
  synth_cmd->add_option("--velocity", synth.velocity, "VX,VY in px/frame");
  synth_cmd->add_option("--rotate", synth.rotate, "Rotation in rad/frame");
  synth_cmd->add_option("--size", synth.size, "Image W,H");
  synth_cmd->add_option("--target", synth.target, "Target W,H");
  synth_cmd->add_option("--sequences", synth.sequences, "Number of sequences (seeds S, S+1, ...)");
  synth_cmd->add_option("--format", synth.format, "Groundtruth format")->check(CLI::IsMember({"vot", "got"}));

  fs::path scratch = fs::temp_directory_path() / "duotrack-selftest";
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the acceptance checks and print PASS/FAIL lines");
  selftest_cmd->add_option("--scratch", scratch, "Working directory for generated data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*track_cmd) return run_track(track);
    if (*eval_cmd) return run_eval(eval);
    if (*synth_cmd) return run_synth(synth);
    if (*selftest_cmd) return run_selftest(self_path(argv[0]), scratch);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
