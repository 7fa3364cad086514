#include "duotrack/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "duotrack/errors.hpp"

namespace duotrack {

namespace {

// Reads the next header integer, skipping whitespace and '#' comments.
int header_int(std::istream& in, const std::filesystem::path& path) {
  int c = in.get();
  while (true) {
    if (c == '#') {
      while (c != '\n' && c != std::char_traits<char>::eof()) c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c < '0' || c > '9') throw FormatError(path.string() + ": malformed netpbm header");
  long value = 0;
  while (c >= '0' && c <= '9') {
    value = value * 10 + (c - '0');
    if (value > 1'000'000) throw FormatError(path.string() + ": header value too large");
    c = in.get();
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (!std::isspace(c)) throw FormatError(path.string() + ": malformed netpbm header");
  return static_cast<int>(value);
}

struct NetpbmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
};

NetpbmHeader read_header(std::istream& in, const std::filesystem::path& path, const char* magic) {
  char m[2] = {};
  in.read(m, 2);
  if (!in || m[0] != magic[0] || m[1] != magic[1]) {
    throw FormatError(path.string() + ": expected " + std::string(magic, 2) + " image");
  }
  NetpbmHeader h;
  h.width = header_int(in, path);
  h.height = header_int(in, path);
  h.maxval = header_int(in, path);
  if (h.width <= 0 || h.height <= 0) throw FormatError(path.string() + ": empty image");
  return h;
}

}  // namespace

std::uint8_t quantize(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open image " + path.string());
  const auto h = read_header(in, path, "P6");
  if (h.maxval <= 0 || h.maxval > 255) throw FormatError(path.string() + ": only 8-bit PPM is supported");
  std::vector<unsigned char> raw(static_cast<std::size_t>(h.width) * h.height * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw FormatError(path.string() + ": truncated pixel data");
  }
  Tensor img(3, h.height, h.width);
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const auto q = raw[(static_cast<std::size_t>(y) * h.width + x) * 3 + c];
        img.at(c, y, x) = static_cast<float>(q) / static_cast<float>(h.maxval);
      }
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path& path, const Tensor& rgb) {
  if (rgb.channels() != 3) throw ShapeError("write_ppm expects a 3-channel tensor");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "P6\n" << rgb.width() << ' ' << rgb.height() << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(rgb.width()) * rgb.height() * 3);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        raw[(static_cast<std::size_t>(y) * rgb.width() + x) * 3 + c] = quantize(rgb.at(c, y, x));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

void write_pgm_mask(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "P5\n" << mask.width << ' ' << mask.height << "\n1\n";
  out.write(reinterpret_cast<const char*>(mask.bits.data()), static_cast<std::streamsize>(mask.bits.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Mask read_pgm_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open mask " + path.string());
  const auto h = read_header(in, path, "P5");
  if (h.maxval != 1) throw FormatError(path.string() + ": mask PGM must have maxval 1");
  Mask m(h.height, h.width);
  in.read(reinterpret_cast<char*>(m.bits.data()), static_cast<std::streamsize>(m.bits.size()));
  if (in.gcount() != static_cast<std::streamsize>(m.bits.size())) {
    throw FormatError(path.string() + ": truncated mask data");
  }
  for (auto b : m.bits) {
    if (b > 1) throw FormatError(path.string() + ": mask value above maxval");
  }
  return m;
}

void draw_polygon(Tensor& rgb, const Polygon& polygon, float r, float g, float b) {
  if (rgb.channels() != 3) throw ShapeError("draw_polygon expects an RGB tensor");
  const auto& v = polygon.vertices;
  const float colour[3] = {r, g, b};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point a = v[i];
    const Point e = v[(i + 1) % v.size()];
    const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * std::hypot(e.x - a.x, e.y - a.y))));
    for (int k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) / steps;
      const int x = static_cast<int>(std::floor(a.x + t * (e.x - a.x)));
      const int y = static_cast<int>(std::floor(a.y + t * (e.y - a.y)));
      if (x < 0 || y < 0 || x >= rgb.width() || y >= rgb.height()) continue;
      for (int c = 0; c < 3; ++c) rgb.at(c, y, x) = colour[c];
    }
  }
}

}  // namespace duotrack
