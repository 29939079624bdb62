#pragma once

#include <span>
#include <vector>

#include "sncnet/error.hpp"
#include "sncnet/geometry.hpp"

namespace sncnet {

// Pixels per grid cell along each axis (row scale sy, column scale sx).
struct PixelScale {
  float sy = 1.0f;
  float sx = 1.0f;

  bool operator==(const PixelScale&) const = default;
};

// Allowed drift of a descriptor's L2 norm from 1.
inline constexpr float kNormTolerance = 1e-4f;

// Dense h x w grid of c-dimensional descriptors, row-major with channels
// packed per cell. Every descriptor is unit length within kNormTolerance or
// exactly zero; zero cells act as padding and never win a similarity
// comparison. Immutable once constructed.
class FeatureMap {
 public:
  FeatureMap() = default;

  // Validates the norm invariant; throws DataError on non-finite or
  // off-norm descriptors, ShapeError on inconsistent sizes.
  FeatureMap(int h, int w, int c, std::vector<float> values,
             PixelScale scale = {});

  // Convenience factory that L2-normalises each descriptor first
  // (all-zero cells stay zero).
  static FeatureMap normalised(int h, int w, int c, std::vector<float> values,
                               PixelScale scale = {});

  // Escape hatch for callers that deliberately want non-unit descriptors
  // (raw pooled values); everything downstream assumes unit norms, so
  // cosine-similarity semantics change when this is used.
  static FeatureMap unvalidated(int h, int w, int c, std::vector<float> values,
                                PixelScale scale = {});

  int height() const { return h_; }
  int width() const { return w_; }
  int channels() const { return c_; }
  const PixelScale& pixel_scale() const { return scale_; }

  std::span<const float> values() const { return {values_.data(), values_.size()}; }
  std::span<const float> descriptor(int y, int x) const {
    const std::size_t cell = static_cast<std::size_t>(y) * w_ + x;
    return {values_.data() + cell * c_, static_cast<std::size_t>(c_)};
  }

  // Cell-centre mapping into source-image pixels:
  // pixel = (coord + 0.5) * scale - 0.5 along each axis.
  PixelPoint grid_to_pixel(double row, double col) const {
    return {(col + 0.5) * scale_.sx - 0.5, (row + 0.5) * scale_.sy - 0.5};
  }

 private:
  FeatureMap(int h, int w, int c, std::vector<float>&& values, PixelScale scale,
             bool validate);

  int h_ = 0;
  int w_ = 0;
  int c_ = 0;
  PixelScale scale_{};
  std::vector<float> values_;
};

} // namespace sncnet
