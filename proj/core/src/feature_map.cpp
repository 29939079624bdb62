#include "sncnet/feature_map.hpp"

#include <cmath>
#include <utility>

namespace sncnet {

namespace {

void check_sizes(int h, int w, int c, std::size_t value_count,
                 const PixelScale& scale) {
  if (h < 1 || w < 1 || c < 1)
    throw ShapeError("feature map dims must be positive");
  if (value_count != std::size_t(h) * std::size_t(w) * std::size_t(c))
    throw ShapeError("value count does not match h * w * c");
  if (!(scale.sy > 0.0f) || !(scale.sx > 0.0f))
    throw ShapeError("pixel scale components must be positive");
}

} // namespace

FeatureMap::FeatureMap(int h, int w, int c, std::vector<float>&& values,
                       PixelScale scale, bool validate)
    : h_(h), w_(w), c_(c), scale_(scale), values_(std::move(values)) {
  check_sizes(h_, w_, c_, values_.size(), scale_);
  if (!validate) return;
  const std::size_t cells = std::size_t(h_) * w_;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const float* d = values_.data() + cell * c_;
    double nn = 0.0;
    for (int ch = 0; ch < c_; ++ch) nn += double(d[ch]) * d[ch];
    if (!std::isfinite(nn))
      throw DataError("non-finite descriptor in feature map");
    if (nn == 0.0) continue; // zero cells are padding
    if (std::abs(std::sqrt(nn) - 1.0) > kNormTolerance)
      throw DataError("descriptor norm outside the unit tolerance");
  }
}

FeatureMap::FeatureMap(int h, int w, int c, std::vector<float> values,
                       PixelScale scale)
    : FeatureMap(h, w, c, std::move(values), scale, true) {}

FeatureMap FeatureMap::normalised(int h, int w, int c,
                                  std::vector<float> values, PixelScale scale) {
  check_sizes(h, w, c, values.size(), scale);
  const std::size_t cells = std::size_t(h) * w;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    float* d = values.data() + cell * c;
    double nn = 0.0;
    for (int ch = 0; ch < c; ++ch) nn += double(d[ch]) * d[ch];
    if (!std::isfinite(nn))
      throw DataError("non-finite descriptor in feature map");
    if (nn == 0.0) continue;
    const double inv = 1.0 / std::sqrt(nn);
    for (int ch = 0; ch < c; ++ch) d[ch] = static_cast<float>(d[ch] * inv);
  }
  return FeatureMap(h, w, c, std::move(values), scale, true);
}

FeatureMap FeatureMap::unvalidated(int h, int w, int c,
                                   std::vector<float> values,
                                   PixelScale scale) {
  return FeatureMap(h, w, c, std::move(values), scale, false);
}

} // namespace sncnet
