#pragma once

#include <string>

#include "sncnet/feature_map.hpp"
#include "sncnet/image.hpp"

namespace sncnet {

// Binary container (magic "SNCF"): h, w, c, pixel scale, then h*w*c f32
// values row-major, little-endian. Loading repairs descriptor norms only
// when they drift past kNormTolerance, so a valid file reloads bit-exactly.
void save_feature_map(const FeatureMap& map, const std::string& path);
FeatureMap load_feature_map(const std::string& path);

// Dense patch descriptors: every stride-aligned p x p window becomes one grid
// cell whose descriptor is the mean-subtracted, L2-normalised pixel patch
// (all-zero for constant patches). Grid extent is floor((H - p) / s) + 1 per
// axis and the pixel scale is (s, s).
FeatureMap extract_patch_descriptors(const GrayImage& image, int patch,
                                     int stride);

// Stride-2 per-channel max over 2x2 cell blocks; an odd trailing row/column
// is dropped. Pooled descriptors are renormalised to unit length by default;
// skipping that changes every downstream cosine similarity, so the escape
// hatch exists only for callers who knowingly want raw pooled values.
// The pixel scale doubles either way.
FeatureMap maxpool2x2(const FeatureMap& fine, bool renormalise = true);

} // namespace sncnet
