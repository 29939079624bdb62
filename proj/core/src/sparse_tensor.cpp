// COO storage with a canonical site order, the two structural ops (transpose
// and sparse addition) and the binary container.

#include "sncnet/sparse_tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <utility>

#include "detail/io_util.hpp"

namespace sncnet {

namespace {

std::atomic<std::uint64_t> g_live_bytes{0};
std::atomic<std::uint64_t> g_peak_bytes{0};

void account_alloc(std::uint64_t bytes) {
  const std::uint64_t now =
      g_live_bytes.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::uint64_t peak = g_peak_bytes.load(std::memory_order_relaxed);
  while (now > peak &&
         !g_peak_bytes.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void account_free(std::uint64_t bytes) {
  g_live_bytes.fetch_sub(bytes, std::memory_order_relaxed);
}

bool in_bounds(const Site4& s, const Dims4& d) {
  return s.i >= 0 && s.i < d.a_h && s.j >= 0 && s.j < d.a_w && s.k >= 0 &&
         s.k < d.b_h && s.l >= 0 && s.l < d.b_w;
}

void check_shape(const Dims4& dims, int channels, std::size_t site_count,
                 std::size_t value_count) {
  if (dims.a_h < 1 || dims.a_w < 1 || dims.b_h < 1 || dims.b_w < 1)
    throw ShapeError("tensor dims must be positive");
  if (channels < 1) throw ShapeError("tensor needs at least one channel");
  if (value_count != site_count * static_cast<std::size_t>(channels))
    throw ShapeError("value count does not match sites * channels");
}

std::uint64_t payload_bytes(std::size_t sites, int channels) {
  return std::uint64_t(sites) * (16 + 4 * std::uint64_t(channels));
}

} // namespace

namespace detail {

ByteReservation::ByteReservation(std::uint64_t bytes) : bytes_(bytes) {
  account_alloc(bytes_);
}

ByteReservation::~ByteReservation() { account_free(bytes_); }

ByteReservation::ByteReservation(const ByteReservation& other)
    : bytes_(other.bytes_) {
  account_alloc(bytes_);
}

ByteReservation& ByteReservation::operator=(const ByteReservation& other) {
  if (this != &other) {
    account_free(bytes_);
    bytes_ = other.bytes_;
    account_alloc(bytes_);
  }
  return *this;
}

ByteReservation::ByteReservation(ByteReservation&& other) noexcept
    : bytes_(other.bytes_) {
  other.bytes_ = 0;
}

ByteReservation& ByteReservation::operator=(ByteReservation&& other) noexcept {
  if (this != &other) {
    account_free(bytes_);
    bytes_ = other.bytes_;
    other.bytes_ = 0;
  }
  return *this;
}

} // namespace detail

std::uint64_t TensorMemoryStats::current_bytes() {
  return g_live_bytes.load(std::memory_order_relaxed);
}

std::uint64_t TensorMemoryStats::peak_bytes() {
  return g_peak_bytes.load(std::memory_order_relaxed);
}

void TensorMemoryStats::reset_peak() {
  g_peak_bytes.store(g_live_bytes.load(std::memory_order_relaxed),
                     std::memory_order_relaxed);
}

SparseTensor4D::SparseTensor4D(Dims4 dims, int channels)
    : dims_(dims), channels_(channels) {
  check_shape(dims, channels, 0, 0);
}

SparseTensor4D::SparseTensor4D(Dims4 dims, int channels,
                               std::vector<Site4>&& sites,
                               std::vector<float>&& values)
    : dims_(dims),
      channels_(channels),
      sites_(std::move(sites)),
      values_(std::move(values)),
      reservation_(payload_bytes(sites_.size(), channels_)) {}

SparseTensor4D SparseTensor4D::from_sites(Dims4 dims, int channels,
                                          std::vector<Site4> sites,
                                          std::vector<float> values) {
  check_shape(dims, channels, sites.size(), values.size());
  for (const Site4& s : sites)
    if (!in_bounds(s, dims)) throw ShapeError("site out of bounds");

  const std::size_t n = sites.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return site_less(sites[a], sites[b]);
  });
  for (std::size_t idx = 1; idx < n; ++idx)
    if (sites[order[idx - 1]] == sites[order[idx]])
      throw ShapeError("duplicate coordinate in site list");

  std::vector<Site4> sorted_sites(n);
  std::vector<float> sorted_values(values.size());
  const std::size_t c = static_cast<std::size_t>(channels);
  for (std::size_t idx = 0; idx < n; ++idx) {
    sorted_sites[idx] = sites[order[idx]];
    std::copy_n(values.begin() + order[idx] * c, c,
                sorted_values.begin() + idx * c);
  }
  return SparseTensor4D(dims, channels, std::move(sorted_sites),
                        std::move(sorted_values));
}

SparseTensor4D SparseTensor4D::from_sorted(Dims4 dims, int channels,
                                           std::vector<Site4> sites,
                                           std::vector<float> values) {
  check_shape(dims, channels, sites.size(), values.size());
  for (std::size_t idx = 0; idx < sites.size(); ++idx) {
    if (!in_bounds(sites[idx], dims)) throw ShapeError("site out of bounds");
    if (idx > 0 && !site_less(sites[idx - 1], sites[idx]))
      throw ShapeError("site list is not in strictly ascending canonical order");
  }
  return SparseTensor4D(dims, channels, std::move(sites), std::move(values));
}

std::uint64_t SparseTensor4D::linear_index(const Site4& s) const {
  return (std::uint64_t(s.i) * dims_.a_w + s.j) *
             (std::uint64_t(dims_.b_h) * dims_.b_w) +
         std::uint64_t(s.k) * dims_.b_w + s.l;
}

std::optional<std::size_t> SparseTensor4D::find(const Site4& s) const {
  const auto it = std::lower_bound(sites_.begin(), sites_.end(), s, site_less);
  if (it == sites_.end() || !(*it == s)) return std::nullopt;
  return static_cast<std::size_t>(it - sites_.begin());
}

SparseTensor4D transpose4d(const SparseTensor4D& t) {
  const std::size_t n = t.size();
  const std::size_t c = static_cast<std::size_t>(t.channels());
  const auto sites = t.sites();
  const auto values = t.values();

  std::vector<Site4> swapped(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Site4& s = sites[idx];
    swapped[idx] = {s.k, s.l, s.i, s.j};
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return site_less(swapped[a], swapped[b]);
  });

  std::vector<Site4> out_sites(n);
  std::vector<float> out_values(n * c);
  for (std::size_t idx = 0; idx < n; ++idx) {
    out_sites[idx] = swapped[order[idx]];
    std::copy_n(values.begin() + order[idx] * c, c, out_values.begin() + idx * c);
  }
  return SparseTensor4D::from_sorted(t.dims().transposed(), t.channels(),
                                     std::move(out_sites), std::move(out_values));
}

SparseTensor4D add_sparse(const SparseTensor4D& a, const SparseTensor4D& b) {
  if (!(a.dims() == b.dims()))
    throw ShapeError("add_sparse: operand dims differ");
  if (a.channels() != b.channels())
    throw ShapeError("add_sparse: operand channels differ");

  const std::size_t c = static_cast<std::size_t>(a.channels());
  const auto sa = a.sites();
  const auto sb = b.sites();
  const auto va = a.values();
  const auto vb = b.values();

  std::vector<Site4> sites;
  std::vector<float> values;
  sites.reserve(sa.size() + sb.size());
  values.reserve((sa.size() + sb.size()) * c);

  std::size_t ia = 0, ib = 0;
  while (ia < sa.size() || ib < sb.size()) {
    const bool take_a =
        ib == sb.size() ||
        (ia < sa.size() && site_less(sa[ia], sb[ib]));
    const bool take_b =
        ia == sa.size() ||
        (ib < sb.size() && site_less(sb[ib], sa[ia]));
    if (take_a) {
      sites.push_back(sa[ia]);
      values.insert(values.end(), va.begin() + ia * c, va.begin() + (ia + 1) * c);
      ++ia;
    } else if (take_b) {
      sites.push_back(sb[ib]);
      values.insert(values.end(), vb.begin() + ib * c, vb.begin() + (ib + 1) * c);
      ++ib;
    } else { // same coordinate in both operands
      sites.push_back(sa[ia]);
      for (std::size_t ch = 0; ch < c; ++ch)
        values.push_back(va[ia * c + ch] + vb[ib * c + ch]);
      ++ia;
      ++ib;
    }
  }
  return SparseTensor4D::from_sorted(a.dims(), a.channels(), std::move(sites),
                                     std::move(values));
}

void save_tensor(const SparseTensor4D& t, const std::string& path) {
  auto os = detail::open_output(path);
  detail::put_magic(os, "SNC4");
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(t.dims().a_h));
  detail::put_u32(os, static_cast<std::uint32_t>(t.dims().a_w));
  detail::put_u32(os, static_cast<std::uint32_t>(t.dims().b_h));
  detail::put_u32(os, static_cast<std::uint32_t>(t.dims().b_w));
  detail::put_u32(os, static_cast<std::uint32_t>(t.channels()));
  detail::put_u64(os, t.size());
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    const Site4& s = t.site(idx);
    detail::put_u32(os, static_cast<std::uint32_t>(s.i));
    detail::put_u32(os, static_cast<std::uint32_t>(s.j));
    detail::put_u32(os, static_cast<std::uint32_t>(s.k));
    detail::put_u32(os, static_cast<std::uint32_t>(s.l));
    detail::put_f32_array(os, t.values_at(idx));
  }
  if (!os) throw IoError("write failed: " + path);
}

SparseTensor4D load_tensor(const std::string& path) {
  auto is = detail::open_input(path);
  detail::expect_magic(is, "SNC4");
  detail::expect_version(is, 1);
  Dims4 dims;
  dims.a_h = static_cast<int>(detail::get_u32(is, "dims"));
  dims.a_w = static_cast<int>(detail::get_u32(is, "dims"));
  dims.b_h = static_cast<int>(detail::get_u32(is, "dims"));
  dims.b_w = static_cast<int>(detail::get_u32(is, "dims"));
  const auto channels = detail::get_u32(is, "channels");
  const auto count = detail::get_u64(is, "site count");
  if (channels < 1 || channels > (1u << 20))
    throw DataError("implausible channel count");
  if (count > (std::uint64_t(1) << 40))
    throw DataError("implausible site count");

  std::vector<Site4> sites(count);
  std::vector<float> values(count * channels);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    Site4& s = sites[idx];
    s.i = static_cast<std::int32_t>(detail::get_u32(is, "site"));
    s.j = static_cast<std::int32_t>(detail::get_u32(is, "site"));
    s.k = static_cast<std::int32_t>(detail::get_u32(is, "site"));
    s.l = static_cast<std::int32_t>(detail::get_u32(is, "site"));
    detail::get_f32_array(
        is, {values.data() + idx * channels, channels}, "values");
  }
  for (const float v : values)
    if (!std::isfinite(v)) throw DataError("non-finite value in tensor payload");
  // from_sites keeps corrupt files honest about bounds and duplicates too.
  return SparseTensor4D::from_sites(dims, static_cast<int>(channels),
                                    std::move(sites), std::move(values));
}

} // namespace sncnet
