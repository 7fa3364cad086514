#include "duotrack/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "duotrack/errors.hpp"

namespace duotrack {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("bad numeric value '" + std::string(s) + "'");
  }
  return value;
}

template <class T>
std::vector<T> parse_list(std::string_view s) {
  std::vector<T> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_number<T>(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("bad boolean '" + std::string(s) + "'");
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_real(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"backbone.kind",
       [](RunConfig& c, std::string_view v) {
         auto& b = c.tracker.backbone;
         const auto seed = b.seed;
         if (v == "identity") {
           b = BackboneConfig::identity();
         } else if (v == "conv") {
           if (b.kind != BackboneKind::conv) b = BackboneConfig::layout("default");
         } else {
           throw ConfigError("unknown backbone kind '" + std::string(v) + "'");
         }
         b.seed = seed;
       }},
      {"backbone.layout",
       [](RunConfig& c, std::string_view v) {
         c.tracker.backbone = BackboneConfig::layout(v, c.tracker.backbone.seed);
       }},
      {"backbone.channels",
       [](RunConfig& c, std::string_view v) { c.tracker.backbone.stage_channels = parse_list<int>(v); }},
      {"backbone.strides",
       [](RunConfig& c, std::string_view v) { c.tracker.backbone.stage_strides = parse_list<int>(v); }},
      {"backbone.total_stride",
       [](RunConfig& c, std::string_view v) { c.tracker.backbone.total_stride = parse_number<int>(v); }},
      {"backbone.seed",
       [](RunConfig& c, std::string_view v) { c.tracker.backbone.seed = parse_number<std::uint64_t>(v); }},
      {"backbone.weights",
       [](RunConfig& c, std::string_view v) {
         if (v.empty()) throw ConfigError("backbone.weights needs a path");
         c.tracker.backbone_weights = std::filesystem::path(std::string(v));
       }},
      {"head.kind",
       [](RunConfig& c, std::string_view v) {
         if (v == "corr_peak") {
           c.tracker.head.kind = HeadKind::corr_peak;
         } else if (v == "conv") {
           c.tracker.head.kind = HeadKind::conv;
         } else {
           throw ConfigError("unknown head kind '" + std::string(v) + "'");
         }
       }},
      {"head.correlation",
       [](RunConfig& c, std::string_view v) {
         if (v == "raw") {
           c.tracker.head.correlation = CorrelationMode::raw;
         } else if (v == "normalized") {
           c.tracker.head.correlation = CorrelationMode::normalized;
         } else {
           throw ConfigError("unknown correlation mode '" + std::string(v) + "'");
         }
       }},
      {"head.aggregate_layers",
       [](RunConfig& c, std::string_view v) { c.tracker.head.aggregate_layers = parse_number<int>(v); }},
      {"head.window_influence",
       [](RunConfig& c, std::string_view v) { c.tracker.head.window_influence = parse_number<double>(v); }},
      {"head.tower_channels",
       [](RunConfig& c, std::string_view v) { c.tracker.head.tower_channels = parse_number<int>(v); }},
      {"head.seed", [](RunConfig& c, std::string_view v) { c.tracker.head.seed = parse_number<std::uint64_t>(v); }},
      {"seg.backend",
       [](RunConfig& c, std::string_view v) {
         if (v == "histogram") {
           c.tracker.seg.backend = SegBackend::histogram;
         } else if (v == "neural") {
           c.tracker.seg.backend = SegBackend::neural;
         } else {
           throw ConfigError("unknown segmentation backend '" + std::string(v) + "'");
         }
       }},
      {"seg.threshold", [](RunConfig& c, std::string_view v) { c.tracker.seg.threshold = parse_number<double>(v); }},
      {"seg.box_margin",
       [](RunConfig& c, std::string_view v) { c.tracker.seg.box_margin = parse_number<double>(v); }},
      {"seg.keep_largest_component",
       [](RunConfig& c, std::string_view v) { c.tracker.seg.keep_largest_component = parse_bool(v); }},
      {"seg.histogram_bins",
       [](RunConfig& c, std::string_view v) { c.tracker.seg.histogram_bins = parse_number<int>(v); }},
      {"seg.refine_width",
       [](RunConfig& c, std::string_view v) { c.tracker.seg.refine_width = parse_number<int>(v); }},
      {"seg.seed", [](RunConfig& c, std::string_view v) { c.tracker.seg.seed = parse_number<std::uint64_t>(v); }},
      {"crop.exemplar_out",
       [](RunConfig& c, std::string_view v) { c.tracker.crop.exemplar_out = parse_number<int>(v); }},
      {"crop.search_out", [](RunConfig& c, std::string_view v) { c.tracker.crop.search_out = parse_number<int>(v); }},
      {"crop.context", [](RunConfig& c, std::string_view v) { c.tracker.crop.context = parse_number<double>(v); }},
      {"tracker.size_smoothing",
       [](RunConfig& c, std::string_view v) { c.tracker.size_smoothing = parse_number<double>(v); }},
      {"eval.burn_in", [](RunConfig& c, std::string_view v) { c.eval.burn_in = parse_number<int>(v); }},
      {"eval.reinit_gap", [](RunConfig& c, std::string_view v) { c.eval.reinit_gap = parse_number<int>(v); }},
      {"eval.eao_interval",
       [](RunConfig& c, std::string_view v) {
         if (v == "auto") {
           c.eval.eao_interval.reset();
           return;
         }
         const auto values = parse_list<int>(v);
         if (values.size() != 2) throw ConfigError("eval.eao_interval expects LO,HI or auto");
         c.eval.eao_interval = std::pair{values[0], values[1]};
       }},
      {"eval.sr_thresholds",
       [](RunConfig& c, std::string_view v) { c.eval.sr_thresholds = parse_list<double>(v); }},
  };
  return table;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig config;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const std::string where = source + " line " + std::to_string(line_no) + ": ";
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string_view key = trim(text.substr(0, eq));
    const std::string_view value = trim(text.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
    if (!seen.emplace(key).second) throw ConfigError(where + "repeated key '" + std::string(key) + "'");
    try {
      it->second(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  try {
    config.tracker.validate();
    config.eval.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

void write_config(std::ostream& out, const RunConfig& c) {
  const auto& t = c.tracker;
  out << "backbone.kind = " << (t.backbone.kind == BackboneKind::identity ? "identity" : "conv") << '\n'
      << "backbone.channels = " << join(t.backbone.stage_channels) << '\n'
      << "backbone.strides = " << join(t.backbone.stage_strides) << '\n'
      << "backbone.total_stride = " << t.backbone.total_stride << '\n'
      << "backbone.seed = " << t.backbone.seed << '\n';
  if (t.backbone_weights) out << "backbone.weights = " << t.backbone_weights->string() << '\n';
  out << "head.kind = " << (t.head.kind == HeadKind::conv ? "conv" : "corr_peak") << '\n'
      << "head.correlation = " << (t.head.correlation == CorrelationMode::raw ? "raw" : "normalized") << '\n'
      << "head.aggregate_layers = " << t.head.aggregate_layers << '\n'
      << "head.window_influence = " << format_real(t.head.window_influence) << '\n'
      << "head.tower_channels = " << t.head.tower_channels << '\n'
      << "head.seed = " << t.head.seed << '\n'
      << "seg.backend = " << (t.seg.backend == SegBackend::neural ? "neural" : "histogram") << '\n'
      << "seg.threshold = " << format_real(t.seg.threshold) << '\n'
      << "seg.box_margin = " << format_real(t.seg.box_margin) << '\n'
      << "seg.keep_largest_component = " << (t.seg.keep_largest_component ? "true" : "false") << '\n'
      << "seg.histogram_bins = " << t.seg.histogram_bins << '\n'
      << "seg.refine_width = " << t.seg.refine_width << '\n'
      << "seg.seed = " << t.seg.seed << '\n'
      << "crop.exemplar_out = " << t.crop.exemplar_out << '\n'
      << "crop.search_out = " << t.crop.search_out << '\n'
      << "crop.context = " << format_real(t.crop.context) << '\n'
      << "tracker.size_smoothing = " << format_real(t.size_smoothing) << '\n'
      << "eval.burn_in = " << c.eval.burn_in << '\n'
      << "eval.reinit_gap = " << c.eval.reinit_gap << '\n'
      << "eval.eao_interval = "
      << (c.eval.eao_interval
              ? std::to_string(c.eval.eao_interval->first) + "," + std::to_string(c.eval.eao_interval->second)
              : std::string("auto"))
      << '\n'
      << "eval.sr_thresholds = " << join(c.eval.sr_thresholds) << '\n';
}

}  // namespace duotrack
