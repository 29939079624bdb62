// Submanifold 4D convolution over COO tensors, its dense oracle, and the
// weights container. The sparse engine and the kernel-map fast path share one
// accumulation order (bias, then offsets ascending, input channels ascending)
// so their outputs agree bit for bit.

#include "sncnet/conv_network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "detail/io_util.hpp"
#include "sncnet/threading.hpp"

namespace sncnet {

namespace {

// Neighbour coordinate through one stencil offset; false when it leaves the
// grid (zero padding: such neighbours contribute nothing).
inline bool shift_site(const Site4& s, const StencilOffset& o, const Dims4& d,
                       Site4& out) {
  out = {s.i + o.di, s.j + o.dj, s.k + o.dk, s.l + o.dl};
  return out.i >= 0 && out.i < d.a_h && out.j >= 0 && out.j < d.a_w &&
         out.k >= 0 && out.k < d.b_h && out.l >= 0 && out.l < d.b_w;
}

inline void accumulate(float* acc, const float* v, const float* w, int cin,
                       int cout) {
  for (int ci = 0; ci < cin; ++ci) {
    const float x = v[ci];
    const float* wc = w + std::size_t(ci) * cout;
    for (int co = 0; co < cout; ++co) acc[co] += x * wc[co];
  }
}

inline void apply_activation(float* acc, int cout, Activation act) {
  if (act != Activation::relu) return;
  for (int co = 0; co < cout; ++co)
    if (acc[co] < 0.0f) acc[co] = 0.0f;
}

void check_layer_input(const ConvLayer& layer, int channels) {
  layer.validate();
  if (layer.in_channels != channels)
    throw ShapeError("layer input channels do not match tensor channels");
}

} // namespace

void ConvLayer::validate() const {
  if (in_channels < 1 || out_channels < 1)
    throw ShapeError("layer channel counts must be positive");
  if (weights.size() != std::size_t(kStencilSize) * in_channels * out_channels)
    throw ShapeError("kernel size does not match 81 * in * out");
  if (bias.size() != std::size_t(out_channels))
    throw ShapeError("bias size does not match out channels");
}

void ConvNetwork::validate() const {
  if (layers.empty()) throw ShapeError("network has no layers");
  for (const ConvLayer& layer : layers) layer.validate();
  for (std::size_t idx = 1; idx < layers.size(); ++idx)
    if (layers[idx - 1].out_channels != layers[idx].in_channels)
      throw ShapeError("layer channel chain is inconsistent");
  if (layers.front().in_channels != 1 || layers.back().out_channels != 1)
    throw ShapeError("network must run from 1 channel to 1 channel");
}

SparseTensor4D submanifold_conv(const SparseTensor4D& input,
                                const ConvLayer& layer) {
  check_layer_input(layer, input.channels());
  const std::size_t n = input.size();
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  const Dims4 dims = input.dims();
  const auto sites = input.sites();
  const float* vals = input.values().data();

  std::vector<float> out(n * cout);

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t s = 0; s < std::int64_t(n); ++s) {
    float* acc = out.data() + std::size_t(s) * cout;
    for (int co = 0; co < cout; ++co) acc[co] = layer.bias[co];
    for (int off = 0; off < kStencilSize; ++off) {
      Site4 nb;
      if (!shift_site(sites[s], stencil_offset(off), dims, nb)) continue;
      const auto hit = input.find(nb);
      if (!hit) continue;
      accumulate(acc, vals + *hit * cin,
                 layer.weights.data() + std::size_t(off) * cin * cout, cin,
                 cout);
    }
    apply_activation(acc, cout, layer.activation);
  }

  std::vector<Site4> out_sites(sites.begin(), sites.end());
  return SparseTensor4D::from_sorted(dims, cout, std::move(out_sites),
                                     std::move(out));
}

KernelMap KernelMap::build(const SparseTensor4D& t) {
  const std::size_t n = t.size();
  const Dims4 dims = t.dims();
  const auto sites = t.sites();

  std::array<std::vector<Pair>, kStencilSize> per_offset;
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int off = 0; off < kStencilSize; ++off) {
    const StencilOffset delta = stencil_offset(off);
    auto& pairs = per_offset[off];
    // A uniform shift preserves the canonical order, so the neighbour of
    // site s is found by a forward-only sweep: O(n) per offset.
    std::size_t q = 0;
    for (std::size_t s = 0; s < n; ++s) {
      Site4 want;
      if (!shift_site(sites[s], delta, dims, want)) continue;
      while (q < n && site_less(sites[q], want)) ++q;
      if (q == n) break;
      if (sites[q] == want)
        pairs.push_back({static_cast<std::uint32_t>(s),
                         static_cast<std::uint32_t>(q)});
    }
  }

  KernelMap map;
  map.site_count_ = n;
  std::size_t total = 0;
  for (int off = 0; off < kStencilSize; ++off) {
    map.begin_[off] = total;
    total += per_offset[off].size();
  }
  map.begin_[kStencilSize] = total;
  map.pairs_.resize(total);
  for (int off = 0; off < kStencilSize; ++off)
    std::copy(per_offset[off].begin(), per_offset[off].end(),
              map.pairs_.begin() + map.begin_[off]);
  return map;
}

SparseTensor4D submanifold_conv(const SparseTensor4D& input,
                                const ConvLayer& layer, const KernelMap& map) {
  check_layer_input(layer, input.channels());
  if (map.site_count() != input.size())
    throw ShapeError("kernel map was built for a different site set");
  const std::size_t n = input.size();
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  const float* vals = input.values().data();

  std::vector<float> out(n * cout);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t s = 0; s < std::int64_t(n); ++s) {
    float* acc = out.data() + std::size_t(s) * cout;
    for (int co = 0; co < cout; ++co) acc[co] = layer.bias[co];
  }

  // Offsets ascending keeps every site's accumulation order identical to the
  // per-site baseline loop. Within one offset each site appears at most once,
  // so the parallel gather writes are disjoint.
  for (int off = 0; off < kStencilSize; ++off) {
    const auto pairs = map.pairs(off);
    const float* w = layer.weights.data() + std::size_t(off) * cin * cout;
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (std::int64_t p = 0; p < std::int64_t(pairs.size()); ++p) {
      const KernelMap::Pair pr = pairs[p];
      accumulate(out.data() + std::size_t(pr.site) * cout,
                 vals + std::size_t(pr.neighbour) * cin, w, cin, cout);
    }
  }

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (std::int64_t s = 0; s < std::int64_t(n); ++s)
    apply_activation(out.data() + std::size_t(s) * cout, cout,
                     layer.activation);

  const auto sites = input.sites();
  std::vector<Site4> out_sites(sites.begin(), sites.end());
  return SparseTensor4D::from_sorted(input.dims(), cout, std::move(out_sites),
                                     std::move(out));
}

DenseTensor4D dense_conv4d(const DenseTensor4D& input, const ConvLayer& layer) {
  check_layer_input(layer, input.channels);
  const Dims4 d = input.dims;
  if (d.a_h > 16 || d.a_w > 16 || d.b_h > 16 || d.b_w > 16)
    throw ShapeError("dense oracle refuses extents above 16 cells");
  if (input.values.size() != d.volume() * std::size_t(input.channels))
    throw ShapeError("dense tensor value count does not match dims");

  const int cin = layer.in_channels;
  const int cout = layer.out_channels;
  DenseTensor4D out(d, cout);

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int i = 0; i < d.a_h; ++i) {
    for (int j = 0; j < d.a_w; ++j)
      for (int k = 0; k < d.b_h; ++k)
        for (int l = 0; l < d.b_w; ++l) {
          float* acc = out.values.data() + out.offset(i, j, k, l);
          for (int co = 0; co < cout; ++co) acc[co] = layer.bias[co];
          for (int off = 0; off < kStencilSize; ++off) {
            const StencilOffset delta = stencil_offset(off);
            Site4 nb;
            if (!shift_site({i, j, k, l}, delta, d, nb)) continue;
            accumulate(acc,
                       input.values.data() + input.offset(nb.i, nb.j, nb.k, nb.l),
                       layer.weights.data() + std::size_t(off) * cin * cout,
                       cin, cout);
          }
          apply_activation(acc, cout, layer.activation);
        }
  }
  return out;
}

SparseTensor4D network_forward(const ConvNetwork& net, SparseTensor4D input) {
  net.validate();
  if (input.channels() != net.layers.front().in_channels)
    throw ShapeError("network input channels do not match tensor");
  // The active set is constant through the whole network, so one kernel map
  // serves every layer.
  const KernelMap map = KernelMap::build(input);
  for (const ConvLayer& layer : net.layers)
    input = submanifold_conv(input, layer, map);
  return input;
}

SparseTensor4D permutation_invariant_forward(const ConvNetwork& net,
                                             SparseTensor4D input) {
  // Transpose first so the straight pass can consume (and free) the input.
  SparseTensor4D flipped = transpose4d(input);
  SparseTensor4D straight = network_forward(net, std::move(input));
  SparseTensor4D crossed =
      transpose4d(network_forward(net, std::move(flipped)));
  return add_sparse(straight, crossed);
}

void save_weights(const ConvNetwork& net, const std::string& path) {
  net.validate();
  auto os = detail::open_output(path);
  detail::put_magic(os, "SNCW");
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(net.layers.size()));
  for (const ConvLayer& layer : net.layers) {
    detail::put_u32(os, static_cast<std::uint32_t>(layer.in_channels));
    detail::put_u32(os, static_cast<std::uint32_t>(layer.out_channels));
    detail::put_u8(os, static_cast<std::uint8_t>(layer.activation));
    detail::put_f32_array(os, layer.weights);
    detail::put_f32_array(os, layer.bias);
  }
  if (!os) throw IoError("write failed: " + path);
}

ConvNetwork load_weights(const std::string& path) {
  auto is = detail::open_input(path);
  detail::expect_magic(is, "SNCW");
  detail::expect_version(is, 1);
  const auto layer_count = detail::get_u32(is, "layer count");
  if (layer_count < 1 || layer_count > 1024)
    throw DataError("implausible layer count");

  ConvNetwork net;
  net.layers.resize(layer_count);
  for (ConvLayer& layer : net.layers) {
    layer.in_channels = static_cast<int>(detail::get_u32(is, "in channels"));
    layer.out_channels = static_cast<int>(detail::get_u32(is, "out channels"));
    if (layer.in_channels < 1 || layer.out_channels < 1 ||
        layer.in_channels > (1 << 16) || layer.out_channels > (1 << 16))
      throw DataError("implausible channel count");
    const auto act = detail::get_u8(is, "activation");
    if (act > 1) throw DataError("unknown activation code");
    layer.activation = static_cast<Activation>(act);
    layer.weights.resize(std::size_t(kStencilSize) * layer.in_channels *
                         layer.out_channels);
    layer.bias.resize(layer.out_channels);
    detail::get_f32_array(is, layer.weights, "kernel");
    detail::get_f32_array(is, layer.bias, "bias");
    for (const float v : layer.weights)
      if (!std::isfinite(v)) throw DataError("non-finite kernel value");
    for (const float v : layer.bias)
      if (!std::isfinite(v)) throw DataError("non-finite bias value");
  }
  net.validate();
  return net;
}

ConvNetwork seeded_init(std::uint32_t seed, int hidden_channels) {
  if (hidden_channels < 1) throw ShapeError("hidden channels must be positive");
  std::mt19937 rng(seed);
  // Explicit u32 -> [-a, a) mapping instead of a distribution object so the
  // same seed reproduces the same weights on every standard library.
  const auto uniform = [&rng](double a) {
    return static_cast<float>(
        (double(rng()) * (1.0 / 4294967296.0) * 2.0 - 1.0) * a);
  };
  const auto make_layer = [&](int cin, int cout, Activation act) {
    ConvLayer layer;
    layer.in_channels = cin;
    layer.out_channels = cout;
    layer.activation = act;
    const double a = 1.0 / std::sqrt(81.0 * cin);
    layer.weights.resize(std::size_t(kStencilSize) * cin * cout);
    for (float& w : layer.weights) w = uniform(a);
    layer.bias.assign(cout, 0.0f);
    return layer;
  };
  ConvNetwork net;
  net.layers.push_back(make_layer(1, hidden_channels, Activation::relu));
  net.layers.push_back(make_layer(hidden_channels, 1, Activation::identity));
  return net;
}

} // namespace sncnet
