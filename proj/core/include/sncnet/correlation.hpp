#pragma once

#include <cstdint>

#include "sncnet/feature_map.hpp"
#include "sncnet/sparse_tensor.hpp"

namespace sncnet {

// Correlation construction knobs. k is the per-cell neighbour count; the
// symmetric flag adds the transposed dst->src pass so either image can come
// first without changing the result (up to transposition).
struct CorrConfig {
  int k = 10;
  bool symmetric = true;
};

// Top-K cosine correlation from src grid cells into dst: each (i, j) keeps
// the k largest inner products <f_src(i,j), f_dst(k,l)>, ties broken towards
// the smaller linearised (k, l). One channel, exactly k sites per source
// cell, values stored raw (no thresholding or clamping).
SparseTensor4D topk_correlation(const FeatureMap& src, const FeatureMap& dst,
                                int k);

// topk(a->b) + transpose(topk(b->a)); at most a_h*a_w*k*2 sites, with
// mutual best pairs merged into a single site holding the summed value.
SparseTensor4D symmetric_correlation(const FeatureMap& a, const FeatureMap& b,
                                     const CorrConfig& cfg);

// Raw COO payload: per site 4 coordinates * 4 B plus channels * 4 B values.
std::uint64_t sparse_storage_bytes(std::uint64_t sites, int channels);
// Same payload with each record padded up to an 8-byte boundary, the layout
// an aligned array-of-records implementation would allocate (24 B per site
// at one channel).
std::uint64_t sparse_storage_bytes_aligned(std::uint64_t sites, int channels);
std::uint64_t storage_bytes(const SparseTensor4D& t);
std::uint64_t storage_bytes_aligned(const SparseTensor4D& t);
// One dense f32 per coordinate: the memory a dense 4D pipeline would touch.
std::uint64_t dense_equivalent_bytes(const Dims4& dims);

} // namespace sncnet
