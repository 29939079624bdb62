#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sncnet/error.hpp"
#include "sncnet/geometry.hpp"

namespace sncnet {

// Plane projective transform, row-major 3x3, normalised so the last entry is
// 1 whenever it is nonzero. Non-invertible matrices (|det| <= 1e-12) are
// rejected on construction.
class Homography {
 public:
  static Homography from_matrix(const std::array<double, 9>& h);
  // Text file: three rows of three whitespace-separated numbers.
  static Homography load(const std::string& path);

  const std::array<double, 9>& matrix() const { return h_; }
  Homography inverse() const;

  // Applies the transform; throws DataError when the point maps to infinity
  // (|w| <= 1e-12).
  PixelPoint warp(const PixelPoint& p) const;

 private:
  explicit Homography(const std::array<double, 9>& h) : h_(h) {}
  std::array<double, 9> h_{};
};

struct PixelCorrespondence {
  PixelPoint a;
  PixelPoint b;
};

// Fraction of correspondences whose reprojection error ||H(a) - b|| lies
// strictly below the threshold. Empty lists and non-positive thresholds are
// errors.
double mma(std::span<const PixelCorrespondence> ms, const Homography& h,
           double threshold);
std::vector<double> mma_sweep(std::span<const PixelCorrespondence> ms,
                              const Homography& h,
                              std::span<const double> thresholds);

struct MmaRow {
  std::string pair_id;
  double threshold = 0.0;
  double accuracy = 0.0;
  std::size_t match_count = 0;
};

struct MmaPair {
  std::string id;
  std::vector<PixelCorrespondence> matches;
  Homography homography;
};

// Per-pair rows followed by aggregate rows (pair_id "mean") that average the
// accuracy over pairs at each threshold.
std::vector<MmaRow> mma_sweep_report(std::span<const MmaPair> pairs,
                                     std::span<const double> thresholds);

// CSV with header pair_id,threshold,accuracy,match_count.
std::string mma_rows_to_csv(std::span<const MmaRow> rows);

// "1:10" -> {1, 2, ..., 10}; comma lists ("0.5,1,2") and single values also
// accepted. Thresholds must be positive.
std::vector<double> parse_threshold_spec(const std::string& spec);

// Reads back the five-column match CSV (xA,yA,xB,yB,score).
std::vector<PixelCorrespondence> read_matches_csv(const std::string& path);

} // namespace sncnet
