// Two-stage match relocalisation into the fine grid: a hard 2x2 crop argmax
// followed by an optional 3x3 softargmax.

#include "sncnet/relocalisation.hpp"

#include <cmath>
#include <cstdint>

#include "sncnet/threading.hpp"

namespace sncnet {

namespace {

inline float dot(std::span<const float> a, std::span<const float> b) {
  float acc = 0.0f;
  for (std::size_t ch = 0; ch < a.size(); ++ch) acc += a[ch] * b[ch];
  return acc;
}

void check_maps(const FeatureMap& fine_a, const FeatureMap& fine_b) {
  if (fine_a.channels() != fine_b.channels())
    throw ShapeError("fine maps must share channel count");
}

void check_crop(const Match& m, const FeatureMap& fine_a,
                const FeatureMap& fine_b) {
  if (m.a_row < 0 || m.a_col < 0 || m.b_row < 0 || m.b_col < 0 ||
      2 * m.a_row + 1 >= fine_a.height() || 2 * m.a_col + 1 >= fine_a.width() ||
      2 * m.b_row + 1 >= fine_b.height() || 2 * m.b_col + 1 >= fine_b.width())
    throw ShapeError("fine maps do not cover the match's 2x2 crops");
}

struct SoftShift {
  double d_row = 0.0;
  double d_col = 0.0;
};

// Softargmax over one 3x3 crop: scores against a fixed reference descriptor,
// max-subtracted exponent for stability, out-of-grid cells excluded and the
// weights renormalised over whatever remains.
SoftShift soft_shift(const FeatureMap& crop_map, int cy, int cx,
                     std::span<const float> reference, double sharpness) {
  double score[9];
  bool valid[9];
  double smax = -1e300;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int idx = (dy + 1) * 3 + (dx + 1);
      const int y = cy + dy;
      const int x = cx + dx;
      valid[idx] = y >= 0 && y < crop_map.height() && x >= 0 && x < crop_map.width();
      if (!valid[idx]) continue;
      score[idx] = double(dot(crop_map.descriptor(y, x), reference));
      if (score[idx] > smax) smax = score[idx];
    }
  double wsum = 0.0, rsum = 0.0, csum = 0.0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int idx = (dy + 1) * 3 + (dx + 1);
      if (!valid[idx]) continue;
      const double w = std::exp(sharpness * (score[idx] - smax));
      wsum += w;
      rsum += w * dy;
      csum += w * dx;
    }
  return {rsum / wsum, csum / wsum};
}

RefinedMatch refine_one(const Match& m, const FeatureMap& fine_a,
                        const FeatureMap& fine_b, const RelocConfig& cfg) {
  switch (cfg.mode) {
    case RelocMode::none: {
      RefinedMatch r;
      r.a_row = 2.0 * m.a_row;
      r.a_col = 2.0 * m.a_col;
      r.b_row = 2.0 * m.b_row;
      r.b_col = 2.0 * m.b_col;
      r.score = m.score;
      r.similarity = dot(fine_a.descriptor(2 * m.a_row, 2 * m.a_col),
                         fine_b.descriptor(2 * m.b_row, 2 * m.b_col));
      r.pixel_a = fine_a.grid_to_pixel(r.a_row, r.a_col);
      r.pixel_b = fine_b.grid_to_pixel(r.b_row, r.b_col);
      return r;
    }
    case RelocMode::hard:
      return hard_reloc(m, fine_a, fine_b);
    case RelocMode::hard_soft:
      return soft_reloc(hard_reloc(m, fine_a, fine_b), fine_a, fine_b, cfg);
  }
  throw Error("unreachable relocalisation mode");
}

} // namespace

RefinedMatch hard_reloc(const Match& m, const FeatureMap& fine_a,
                        const FeatureMap& fine_b) {
  check_maps(fine_a, fine_b);
  check_crop(m, fine_a, fine_b);

  float best = 0.0f;
  int bi = 0, bj = 0, bk = 0, bl = 0;
  bool first = true;
  for (int di = 0; di <= 1; ++di)
    for (int dj = 0; dj <= 1; ++dj) {
      const auto da = fine_a.descriptor(2 * m.a_row + di, 2 * m.a_col + dj);
      for (int dk = 0; dk <= 1; ++dk)
        for (int dl = 0; dl <= 1; ++dl) {
          const float s =
              dot(da, fine_b.descriptor(2 * m.b_row + dk, 2 * m.b_col + dl));
          // Strict improvement keeps the lexicographically first maximiser.
          if (first || s > best) {
            best = s;
            bi = di;
            bj = dj;
            bk = dk;
            bl = dl;
            first = false;
          }
        }
    }

  RefinedMatch r;
  r.a_row = 2.0 * m.a_row + bi;
  r.a_col = 2.0 * m.a_col + bj;
  r.b_row = 2.0 * m.b_row + bk;
  r.b_col = 2.0 * m.b_col + bl;
  r.score = m.score;
  r.similarity = best;
  r.pixel_a = fine_a.grid_to_pixel(r.a_row, r.a_col);
  r.pixel_b = fine_b.grid_to_pixel(r.b_row, r.b_col);
  return r;
}

RefinedMatch soft_reloc(const RefinedMatch& m, const FeatureMap& fine_a,
                        const FeatureMap& fine_b, const RelocConfig& cfg) {
  check_maps(fine_a, fine_b);
  if (!(cfg.temperature > 0.0f))
    throw DataError("softargmax temperature must be positive");
  const double ay = m.a_row, ax = m.a_col, by = m.b_row, bx = m.b_col;
  const auto whole = [](double v) { return v == std::floor(v); };
  if (!whole(ay) || !whole(ax) || !whole(by) || !whole(bx))
    throw DataError("soft relocalisation expects integer fine coordinates");
  const int cay = int(ay), cax = int(ax), cby = int(by), cbx = int(bx);
  if (cay < 0 || cay >= fine_a.height() || cax < 0 || cax >= fine_a.width() ||
      cby < 0 || cby >= fine_b.height() || cbx < 0 || cbx >= fine_b.width())
    throw ShapeError("fine maps do not cover the match");

  const double sharpness = cfg.temperature_divides
                               ? 1.0 / double(cfg.temperature)
                               : double(cfg.temperature);
  const auto centre_a = fine_a.descriptor(cay, cax);
  const auto centre_b = fine_b.descriptor(cby, cbx);
  const SoftShift da = soft_shift(fine_a, cay, cax, centre_b, sharpness);
  const SoftShift db = soft_shift(fine_b, cby, cbx, centre_a, sharpness);

  RefinedMatch r;
  r.a_row = ay + da.d_row;
  r.a_col = ax + da.d_col;
  r.b_row = by + db.d_row;
  r.b_col = bx + db.d_col;
  r.score = m.score;
  r.similarity = dot(centre_a, centre_b);
  r.pixel_a = fine_a.grid_to_pixel(r.a_row, r.a_col);
  r.pixel_b = fine_b.grid_to_pixel(r.b_row, r.b_col);
  return r;
}

std::vector<RefinedMatch> refine_all(const std::vector<Match>& ms,
                                     const FeatureMap& fine_a,
                                     const FeatureMap& fine_b,
                                     const RelocConfig& cfg) {
  check_maps(fine_a, fine_b);
  if (!(cfg.temperature > 0.0f))
    throw DataError("softargmax temperature must be positive");
  // Validate every crop up front; the parallel loop below must not throw.
  for (const Match& m : ms) check_crop(m, fine_a, fine_b);

  std::vector<RefinedMatch> out(ms.size());
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t idx = 0; idx < std::int64_t(ms.size()); ++idx)
    out[idx] = refine_one(ms[idx], fine_a, fine_b, cfg);
  return out;
}

} // namespace sncnet
