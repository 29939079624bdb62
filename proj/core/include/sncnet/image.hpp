#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sncnet/error.hpp"

namespace sncnet {

// 8-bit image flattened to float luminance in [0, 255], row-major.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  float at(int y, int x) const {
    return pixels[std::size_t(y) * width + x];
  }
};

// Reads PGM/PPM, both ASCII (P2/P3) and binary (P5/P6), maxval up to 255.
// Colour collapses to luminance with the BT.601 weights.
GrayImage load_pnm(const std::string& path);

// Binary PGM writer, rounding and clamping to [0, 255]. Mostly a test aid.
void save_pgm(const GrayImage& img, const std::string& path);

} // namespace sncnet
