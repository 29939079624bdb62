#pragma once

namespace sncnet {

// A position in source-image pixels; x runs along the width axis.
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const PixelPoint&) const = default;
};

} // namespace sncnet
