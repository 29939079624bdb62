// Minimal PGM/PPM reader and writer for the extract command and the tests.

#include "sncnet/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "detail/io_util.hpp"

namespace sncnet {

namespace {

// PNM headers allow '#' comments between tokens; binary payload starts after
// a single whitespace byte following the maxval token.
std::string next_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw TruncationError("truncated image header");
  return tok;
}

int parse_int(const std::string& tok, const char* what) {
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw FormatError(std::string("bad integer in image header: ") + what);
  }
}

float luminance(float r, float g, float b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

} // namespace

GrayImage load_pnm(const std::string& path) {
  auto is = detail::open_input(path);
  const std::string magic = next_token(is);
  const bool ascii = magic == "P2" || magic == "P3";
  const bool binary = magic == "P5" || magic == "P6";
  if (!ascii && !binary) throw FormatError("not a PGM/PPM file: " + magic);
  const bool colour = magic == "P3" || magic == "P6";

  const int width = parse_int(next_token(is), "width");
  const int height = parse_int(next_token(is), "height");
  const int maxval = parse_int(next_token(is), "maxval");
  if (width < 1 || height < 1) throw DataError("image dims must be positive");
  if (maxval < 1 || maxval > 255)
    throw DataError("only 8-bit images are supported");

  const int samples_per_pixel = colour ? 3 : 1;
  const std::size_t count =
      std::size_t(width) * height * samples_per_pixel;
  std::vector<float> samples(count);
  if (binary) {
    std::vector<std::uint8_t> raw(count);
    detail::get_bytes(is, raw.data(), count, "pixel data");
    for (std::size_t idx = 0; idx < count; ++idx)
      samples[idx] = static_cast<float>(raw[idx]);
  } else {
    for (std::size_t idx = 0; idx < count; ++idx)
      samples[idx] = static_cast<float>(parse_int(next_token(is), "pixel"));
  }

  GrayImage img;
  img.height = height;
  img.width = width;
  img.pixels.resize(std::size_t(width) * height);
  const float rescale = 255.0f / static_cast<float>(maxval);
  for (std::size_t p = 0; p < img.pixels.size(); ++p) {
    float v = colour ? luminance(samples[3 * p], samples[3 * p + 1],
                                 samples[3 * p + 2])
                     : samples[p];
    img.pixels[p] = v * rescale;
  }
  return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
  if (img.height < 1 || img.width < 1 ||
      img.pixels.size() != std::size_t(img.height) * img.width)
    throw ShapeError("inconsistent image dims");
  auto os = detail::open_output(path);
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<std::uint8_t> raw(img.pixels.size());
  for (std::size_t p = 0; p < raw.size(); ++p) {
    const float v = std::round(img.pixels[p]);
    raw[p] = static_cast<std::uint8_t>(v < 0.0f ? 0.0f : (v > 255.0f ? 255.0f : v));
  }
  detail::put_bytes(os, raw.data(), raw.size());
}

} // namespace sncnet
