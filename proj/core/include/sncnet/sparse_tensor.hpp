#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sncnet/error.hpp"

namespace sncnet {

// Grid extents of a 4D correlation tensor: (a_h, a_w) index the cells of
// image A's feature grid, (b_h, b_w) those of image B.
struct Dims4 {
  int a_h = 0;
  int a_w = 0;
  int b_h = 0;
  int b_w = 0;

  bool operator==(const Dims4&) const = default;
  Dims4 transposed() const { return {b_h, b_w, a_h, a_w}; }
  std::uint64_t volume() const {
    return std::uint64_t(a_h) * std::uint64_t(a_w) * std::uint64_t(b_h) *
           std::uint64_t(b_w);
  }
};

// One active coordinate (i, j, k, l): cell (i, j) in A's grid, (k, l) in B's.
struct Site4 {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;
  std::int32_t l = 0;

  bool operator==(const Site4&) const = default;
};

// Lexicographic comparison; for in-bounds coordinates this is the same order
// as the linearised index i*a_w*b_h*b_w + j*b_h*b_w + k*b_w + l.
inline bool site_less(const Site4& a, const Site4& b) {
  if (a.i != b.i) return a.i < b.i;
  if (a.j != b.j) return a.j < b.j;
  if (a.k != b.k) return a.k < b.k;
  return a.l < b.l;
}

namespace detail {

// RAII registration of a payload size with the global tensor memory stats.
class ByteReservation {
 public:
  ByteReservation() = default;
  explicit ByteReservation(std::uint64_t bytes);
  ~ByteReservation();
  ByteReservation(const ByteReservation& other);
  ByteReservation& operator=(const ByteReservation& other);
  ByteReservation(ByteReservation&& other) noexcept;
  ByteReservation& operator=(ByteReservation&& other) noexcept;

 private:
  std::uint64_t bytes_ = 0;
};

} // namespace detail

// Running byte counts over all live tensor payloads (coordinates + values,
// 16 + 4*channels bytes per site). Used to verify the sparse pipeline stays
// far below the dense-equivalent footprint it reports.
struct TensorMemoryStats {
  static std::uint64_t current_bytes();
  static std::uint64_t peak_bytes();
  // Restarts the high-water mark from the current live total.
  static void reset_peak();
};

// Sparse 4D tensor in COO form. Sites are unique and strictly ascending in
// the linearised coordinate order; values are site-major with `channels`
// scalars per site. Instances are immutable once constructed, so concurrent
// reads need no locking.
class SparseTensor4D {
 public:
  SparseTensor4D() = default;
  // An empty tensor of the given shape.
  SparseTensor4D(Dims4 dims, int channels);

  // Canonicalises: sorts by linearised coordinate, bounds-checks every site
  // and rejects duplicates.
  static SparseTensor4D from_sites(Dims4 dims, int channels,
                                   std::vector<Site4> sites,
                                   std::vector<float> values);

  // For producers that already emit canonical order; still verifies bounds
  // and strict ascent rather than trusting the caller blindly.
  static SparseTensor4D from_sorted(Dims4 dims, int channels,
                                    std::vector<Site4> sites,
                                    std::vector<float> values);

  const Dims4& dims() const { return dims_; }
  int channels() const { return channels_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }

  std::span<const Site4> sites() const { return {sites_.data(), sites_.size()}; }
  std::span<const float> values() const { return {values_.data(), values_.size()}; }
  const Site4& site(std::size_t idx) const { return sites_[idx]; }
  std::span<const float> values_at(std::size_t idx) const {
    return {values_.data() + idx * channels_, static_cast<std::size_t>(channels_)};
  }

  std::uint64_t linear_index(const Site4& s) const;

  // Binary search in the canonical order; nullopt when the coordinate is
  // inactive.
  std::optional<std::size_t> find(const Site4& s) const;

 private:
  SparseTensor4D(Dims4 dims, int channels, std::vector<Site4>&& sites,
                 std::vector<float>&& values);

  Dims4 dims_{};
  int channels_ = 1;
  std::vector<Site4> sites_;
  std::vector<float> values_;
  detail::ByteReservation reservation_;
};

// Swaps the image roles: site (i, j, k, l) -> (k, l, i, j), dims likewise.
// Involution: transpose4d(transpose4d(t)) == t.
SparseTensor4D transpose4d(const SparseTensor4D& t);

// Sparse sum: union of the site sets, channelwise addition where both are
// active. Operands must agree in dims and channels.
SparseTensor4D add_sparse(const SparseTensor4D& a, const SparseTensor4D& b);

// Binary container (magic "SNC4"): dims, channels, site count, then per site
// four u32 coordinates and `channels` f32 values, all little-endian.
void save_tensor(const SparseTensor4D& t, const std::string& path);
SparseTensor4D load_tensor(const std::string& path);

} // namespace sncnet
