#pragma once

#include "sncnet/geometry.hpp"

namespace sncnet {

// Correspondence between coarse grid cells: (a_row, a_col) in image A's
// feature grid, (b_row, b_col) in image B's. Score is the filtered
// correlation value the match was extracted at.
struct Match {
  int a_row = 0;
  int a_col = 0;
  int b_row = 0;
  int b_col = 0;
  float score = 0.0f;

  bool operator==(const Match&) const = default;
};

// Match carried into the fine 2h x 2w grid, with fractional cell coordinates
// plus their projection into source-image pixels. `score` is inherited from
// the parent Match; `similarity` is the descriptor inner product the
// relocalisation settled on.
struct RefinedMatch {
  double a_row = 0.0;
  double a_col = 0.0;
  double b_row = 0.0;
  double b_col = 0.0;
  float score = 0.0f;
  float similarity = 0.0f;
  PixelPoint pixel_a;
  PixelPoint pixel_b;
};

} // namespace sncnet
