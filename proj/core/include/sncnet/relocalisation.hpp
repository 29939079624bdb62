#pragma once

#include <vector>

#include "sncnet/feature_map.hpp"
#include "sncnet/match.hpp"

namespace sncnet {

enum class RelocMode { none, hard, hard_soft };

struct RelocConfig {
  RelocMode mode = RelocMode::hard_soft;
  // Softargmax sharpness; weights are proportional to exp(t * score).
  float temperature = 10.0f;
  // Alternative convention: exponent score / t instead of score * t.
  bool temperature_divides = false;
};

// Lifts a coarse match into the fine grid: tests the 16 cell pairs between
// the 2x2 crops at (2i, 2j) and (2k, 2l) and keeps the best inner product,
// ties towards the smallest (di, dj, dk, dl). The fine maps must be the 2x
// resolution companions of the grid the match came from; the crops then
// never leave the grid. Result coordinates are 2m + delta.
RefinedMatch hard_reloc(const Match& m, const FeatureMap& fine_a,
                        const FeatureMap& fine_b);

// Softargmax refinement over 3x3 crops centred on an integer fine-grid
// match. The (di, dj) displacement weighs A-crop cells against B's centre
// descriptor, (dk, dl) weighs B-crop cells against A's centre; crop cells
// outside the grid are dropped and the weights renormalised over the rest.
// Displacements stay within [-1, 1] per axis.
RefinedMatch soft_reloc(const RefinedMatch& m, const FeatureMap& fine_a,
                        const FeatureMap& fine_b, const RelocConfig& cfg);

// Applies the configured mode to every match. mode none only changes frame:
// coordinates become 2m so all modes live in the fine 2h x 2w grid. Pixel
// coordinates always come from each map's own pixel scale.
std::vector<RefinedMatch> refine_all(const std::vector<Match>& ms,
                                     const FeatureMap& fine_a,
                                     const FeatureMap& fine_b,
                                     const RelocConfig& cfg);

} // namespace sncnet
