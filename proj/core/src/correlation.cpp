// Exact top-K cosine correlation and the storage arithmetic that motivates
// keeping the 4D tensor sparse in the first place.

#include "sncnet/correlation.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "sncnet/threading.hpp"

namespace sncnet {

namespace {

inline float dot(const float* a, const float* b, int c) {
  float acc = 0.0f;
  for (int ch = 0; ch < c; ++ch) acc += a[ch] * b[ch];
  return acc;
}

struct Scored {
  float sim;
  std::int32_t idx; // linearised dst cell
};

// Selection order: larger similarity first, smaller dst cell on ties.
inline bool better(const Scored& a, const Scored& b) {
  if (a.sim != b.sim) return a.sim > b.sim;
  return a.idx < b.idx;
}

} // namespace

SparseTensor4D topk_correlation(const FeatureMap& src, const FeatureMap& dst,
                                int k) {
  if (src.channels() != dst.channels())
    throw ShapeError("correlation operands must share channel count");
  const int candidates = dst.height() * dst.width();
  if (k < 1 || k > candidates)
    throw ShapeError("k must lie in [1, dst grid cells]");

  const int cells = src.height() * src.width();
  const int c = src.channels();
  const int dst_w = dst.width();
  const float* src_vals = src.values().data();
  const float* dst_vals = dst.values().data();

  std::vector<Site4> sites(std::size_t(cells) * k);
  std::vector<float> values(std::size_t(cells) * k);

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int cell = 0; cell < cells; ++cell) {
    const float* q = src_vals + std::size_t(cell) * c;
    std::vector<Scored> kept;
    kept.reserve(k + 1);
    if (k * 4 >= candidates) {
      // Near-dense request: score everything, one sort.
      kept.resize(candidates);
      for (int t = 0; t < candidates; ++t)
        kept[t] = {dot(q, dst_vals + std::size_t(t) * c, c), t};
      std::sort(kept.begin(), kept.end(), better);
      kept.resize(k);
    } else {
      // Keep a descending-sorted window of the k best seen so far.
      for (int t = 0; t < candidates; ++t) {
        const Scored s{dot(q, dst_vals + std::size_t(t) * c, c), t};
        if (kept.size() == std::size_t(k) && !better(s, kept.back())) continue;
        const auto pos = std::lower_bound(kept.begin(), kept.end(), s, better);
        kept.insert(pos, s);
        if (kept.size() > std::size_t(k)) kept.pop_back();
      }
    }
    // Canonical order within the cell: ascending dst coordinate.
    std::sort(kept.begin(), kept.end(),
              [](const Scored& a, const Scored& b) { return a.idx < b.idx; });
    const std::int32_t i = cell / src.width();
    const std::int32_t j = cell % src.width();
    for (int r = 0; r < k; ++r) {
      const std::size_t slot = std::size_t(cell) * k + r;
      sites[slot] = {i, j, kept[r].idx / dst_w, kept[r].idx % dst_w};
      values[slot] = kept[r].sim;
    }
  }

  const Dims4 dims{src.height(), src.width(), dst.height(), dst.width()};
  return SparseTensor4D::from_sorted(dims, 1, std::move(sites),
                                     std::move(values));
}

SparseTensor4D symmetric_correlation(const FeatureMap& a, const FeatureMap& b,
                                     const CorrConfig& cfg) {
  SparseTensor4D ab = topk_correlation(a, b, cfg.k);
  if (!cfg.symmetric) return ab;
  SparseTensor4D ba = topk_correlation(b, a, cfg.k);
  return add_sparse(ab, transpose4d(ba));
}

std::uint64_t sparse_storage_bytes(std::uint64_t sites, int channels) {
  return sites * (16 + 4 * std::uint64_t(channels));
}

std::uint64_t sparse_storage_bytes_aligned(std::uint64_t sites, int channels) {
  const std::uint64_t record = (16 + 4 * std::uint64_t(channels) + 7) & ~7ull;
  return sites * record;
}

std::uint64_t storage_bytes(const SparseTensor4D& t) {
  return sparse_storage_bytes(t.size(), t.channels());
}

std::uint64_t storage_bytes_aligned(const SparseTensor4D& t) {
  return sparse_storage_bytes_aligned(t.size(), t.channels());
}

std::uint64_t dense_equivalent_bytes(const Dims4& dims) {
  return dims.volume() * 4;
}

} // namespace sncnet
