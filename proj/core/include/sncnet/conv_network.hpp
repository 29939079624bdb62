#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sncnet/sparse_tensor.hpp"

namespace sncnet {

enum class Activation : std::uint8_t { identity = 0, relu = 1 };

// The 3^4 stencil has 81 offsets, linearised as
// (di + 1)*27 + (dj + 1)*9 + (dk + 1)*3 + (dl + 1).
inline constexpr int kStencilSize = 81;

struct StencilOffset {
  int di, dj, dk, dl;
};

inline StencilOffset stencil_offset(int index) {
  return {index / 27 - 1, (index / 9) % 3 - 1, (index / 3) % 3 - 1,
          index % 3 - 1};
}

// One 3^4 convolution layer. Weights are offset-major:
// weights[(offset * in_channels + ci) * out_channels + co].
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  Activation activation = Activation::identity;
  std::vector<float> weights; // kStencilSize * in_channels * out_channels
  std::vector<float> bias;    // out_channels

  void validate() const; // throws ShapeError on inconsistent sizes
};

// Layers applied in order. The channel chain must be consistent and run from
// a single input channel to a single output channel.
struct ConvNetwork {
  std::vector<ConvLayer> layers;

  void validate() const;
};

// Dense 4D tensor used by the convolution oracle; value layout
// (((i*a_w + j)*b_h + k)*b_w + l)*channels + ch.
struct DenseTensor4D {
  Dims4 dims{};
  int channels = 1;
  std::vector<float> values;

  DenseTensor4D() = default;
  DenseTensor4D(Dims4 d, int c)
      : dims(d), channels(c), values(d.volume() * c, 0.0f) {}

  std::size_t offset(int i, int j, int k, int l) const {
    return ((((std::size_t(i) * dims.a_w + j) * dims.b_h + k) * dims.b_w + l)) *
           channels;
  }
  float& at(int i, int j, int k, int l, int ch) {
    return values[offset(i, j, k, l) + ch];
  }
  float at(int i, int j, int k, int l, int ch) const {
    return values[offset(i, j, k, l) + ch];
  }
};

// Submanifold convolution: the output is active exactly where the input is,
// and neighbours outside the active set contribute nothing. The baseline
// resolves each stencil neighbour by binary search in the canonical order.
SparseTensor4D submanifold_conv(const SparseTensor4D& input,
                                const ConvLayer& layer);

// Precomputed neighbour indices for every stencil offset. Because the active
// set never changes through a network, one map serves all layers. Built with
// order-preserving sweeps (a uniform shift keeps the canonical order), and
// convolution through it is bit-identical to the binary-search baseline.
class KernelMap {
 public:
  struct Pair {
    std::uint32_t site;      // output/centre index in the canonical order
    std::uint32_t neighbour; // input index contributing through this offset
  };

  static KernelMap build(const SparseTensor4D& t);

  std::span<const Pair> pairs(int offset) const {
    return {pairs_.data() + begin_[offset], begin_[offset + 1] - begin_[offset]};
  }
  std::size_t site_count() const { return site_count_; }

 private:
  std::vector<Pair> pairs_;
  std::array<std::size_t, kStencilSize + 1> begin_{};
  std::size_t site_count_ = 0;
};

SparseTensor4D submanifold_conv(const SparseTensor4D& input,
                                const ConvLayer& layer, const KernelMap& map);

// Dense zero-padded convolution with the same arithmetic order as the sparse
// path. The oracle exists to check the sparse engine, not to run large:
// it refuses any extent above 16 cells.
DenseTensor4D dense_conv4d(const DenseTensor4D& input, const ConvLayer& layer);

// Applies the layers in order. Takes the input by value so each stage can be
// released as soon as the next one exists, keeping live tensor bytes low.
SparseTensor4D network_forward(const ConvNetwork& net, SparseTensor4D input);

// N(c) + transpose(N(transpose(c))): invariant to swapping the two images.
// On a transpose-symmetric site set the output sites equal the input sites.
SparseTensor4D permutation_invariant_forward(const ConvNetwork& net,
                                             SparseTensor4D input);

// Binary container (magic "SNCW"): per layer the channel counts, activation
// byte, offset-major kernel and bias, little-endian f32 payload.
void save_weights(const ConvNetwork& net, const std::string& path);
ConvNetwork load_weights(const std::string& path);

// Deterministic scaled-uniform init: weights in [-a, a] with
// a = 1 / sqrt(81 * in_channels), biases zero. Architecture is the default
// two-layer filter 1 -> hidden (relu) -> 1 (identity). The same seed yields
// the same network on every platform.
ConvNetwork seeded_init(std::uint32_t seed, int hidden_channels = 16);

} // namespace sncnet
