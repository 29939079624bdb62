// Reference implementations and the randomized selfcheck battery. Nothing in
// here is tuned for speed; every function is written the most literal way so
// a disagreement with the production kernels points at the fast path.

#include "sncnet/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "sncnet/feature_map.hpp"
#include "sncnet/match_extraction.hpp"

namespace sncnet::reference {

namespace {

bool in_bounds(int i, int j, int k, int l, const Dims4& d) {
  return i >= 0 && i < d.a_h && j >= 0 && j < d.a_w && k >= 0 && k < d.b_h &&
         l >= 0 && l < d.b_w;
}

} // namespace

DenseTensor4D densify(const SparseTensor4D& t) {
  DenseTensor4D out(t.dims(), t.channels());
  for (std::size_t s = 0; s < t.size(); ++s) {
    const Site4& site = t.site(s);
    const std::span<const float> v = t.values_at(s);
    float* dst = out.values.data() + out.offset(site.i, site.j, site.k, site.l);
    std::copy(v.begin(), v.end(), dst);
  }
  return out;
}

DenseTensor4D conv4d_scatter(const DenseTensor4D& input,
                             const ConvLayer& layer) {
  layer.validate();
  if (input.channels != layer.in_channels) {
    throw ShapeError("layer input channels do not match tensor");
  }
  const Dims4& d = input.dims;
  const int cin = layer.in_channels;
  const int cout = layer.out_channels;

  DenseTensor4D out(d, cout);
  for (std::size_t cell = 0; cell < d.volume(); ++cell) {
    float* acc = out.values.data() + cell * cout;
    for (int co = 0; co < cout; ++co) acc[co] = layer.bias[co];
  }

  // Every input cell pushes its contribution outward. A neighbour at offset
  // delta from the output means the output sits at -delta from the input,
  // and the weight indexed by delta applies.
  for (int i = 0; i < d.a_h; ++i) {
    for (int j = 0; j < d.a_w; ++j) {
      for (int k = 0; k < d.b_h; ++k) {
        for (int l = 0; l < d.b_w; ++l) {
          const float* v = input.values.data() + input.offset(i, j, k, l);
          for (int off = 0; off < kStencilSize; ++off) {
            const StencilOffset delta = stencil_offset(off);
            const int oi = i - delta.di;
            const int oj = j - delta.dj;
            const int ok = k - delta.dk;
            const int ol = l - delta.dl;
            if (!in_bounds(oi, oj, ok, ol, d)) continue;
            float* acc = out.values.data() + out.offset(oi, oj, ok, ol);
            const float* w =
                layer.weights.data() + std::size_t(off) * cin * cout;
            for (int ci = 0; ci < cin; ++ci) {
              for (int co = 0; co < cout; ++co) {
                acc[co] += v[ci] * w[std::size_t(ci) * cout + co];
              }
            }
          }
        }
      }
    }
  }

  if (layer.activation == Activation::relu) {
    for (float& v : out.values) v = v > 0.0f ? v : 0.0f;
  }
  return out;
}

SparseTensor4D masked_network(const ConvNetwork& net,
                              const SparseTensor4D& input) {
  net.validate();
  if (input.channels() != net.layers.front().in_channels) {
    throw ShapeError("network input channels do not match tensor");
  }

  std::vector<bool> active(input.dims().volume(), false);
  for (std::size_t s = 0; s < input.size(); ++s) {
    active[input.linear_index(input.site(s))] = true;
  }

  DenseTensor4D dense = densify(input);
  for (const ConvLayer& layer : net.layers) {
    dense = conv4d_scatter(dense, layer);
    // The submanifold rule never activates new coordinates, so anything the
    // dense pass wrote outside the active set must go back to zero before
    // the next layer can read it.
    for (std::size_t cell = 0; cell < active.size(); ++cell) {
      if (active[cell]) continue;
      float* v = dense.values.data() + cell * dense.channels;
      std::fill(v, v + dense.channels, 0.0f);
    }
  }

  std::vector<Site4> sites(input.sites().begin(), input.sites().end());
  std::vector<float> values(sites.size() * dense.channels);
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const Site4& site = sites[s];
    const float* v =
        dense.values.data() + dense.offset(site.i, site.j, site.k, site.l);
    std::copy(v, v + dense.channels, values.data() + s * dense.channels);
  }
  return SparseTensor4D::from_sorted(input.dims(), dense.channels,
                                     std::move(sites), std::move(values));
}

SparseTensor4D topk_bruteforce(const FeatureMap& src, const FeatureMap& dst,
                               int k) {
  if (src.channels() != dst.channels()) {
    throw ShapeError("correlation operands must share channel count");
  }
  const int candidates = dst.height() * dst.width();
  if (k < 1 || k > candidates) {
    throw ShapeError("k must lie in [1, dst grid cells]");
  }

  std::vector<Site4> sites;
  std::vector<float> values;
  for (int i = 0; i < src.height(); ++i) {
    for (int j = 0; j < src.width(); ++j) {
      const std::span<const float> q = src.descriptor(i, j);
      std::vector<std::pair<float, int>> scored(candidates);
      for (int t = 0; t < candidates; ++t) {
        const std::span<const float> cand =
            dst.descriptor(t / dst.width(), t % dst.width());
        float sim = 0.0f;
        for (int ch = 0; ch < src.channels(); ++ch) sim += q[ch] * cand[ch];
        scored[t] = {sim, t};
      }
      std::sort(scored.begin(), scored.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
                });
      scored.resize(k);
      std::sort(scored.begin(), scored.end(),
                [](const auto& a, const auto& b) { return a.second < b.second; });
      for (const auto& [sim, idx] : scored) {
        sites.push_back({i, j, idx / dst.width(), idx % dst.width()});
        values.push_back(sim);
      }
    }
  }
  const Dims4 dims{src.height(), src.width(), dst.height(), dst.width()};
  return SparseTensor4D::from_sorted(dims, 1, std::move(sites),
                                     std::move(values));
}

SparseTensor4D symmetric_bruteforce(const FeatureMap& a, const FeatureMap& b,
                                    const CorrConfig& cfg) {
  const SparseTensor4D ab = topk_bruteforce(a, b, cfg.k);
  if (!cfg.symmetric) return ab;
  const SparseTensor4D ba = topk_bruteforce(b, a, cfg.k);

  // Accumulate both passes in A-frame coordinates through an ordered map;
  // its key order is the canonical linearised order.
  std::map<std::uint64_t, std::pair<Site4, float>> acc;
  for (std::size_t s = 0; s < ab.size(); ++s) {
    acc[ab.linear_index(ab.site(s))] = {ab.site(s), ab.values_at(s)[0]};
  }
  for (std::size_t s = 0; s < ba.size(); ++s) {
    const Site4& r = ba.site(s);
    const Site4 flipped{r.k, r.l, r.i, r.j};
    const std::uint64_t key = ab.linear_index(flipped);
    auto [it, inserted] = acc.try_emplace(key, flipped, 0.0f);
    it->second.second += ba.values_at(s)[0];
  }

  std::vector<Site4> sites;
  std::vector<float> values;
  sites.reserve(acc.size());
  values.reserve(acc.size());
  for (const auto& [key, entry] : acc) {
    sites.push_back(entry.first);
    values.push_back(entry.second);
  }
  return SparseTensor4D::from_sorted(ab.dims(), 1, std::move(sites),
                                     std::move(values));
}

std::vector<Match> extract_matches_dense(const SparseTensor4D& t) {
  if (t.channels() != 1) {
    throw ShapeError("match extraction expects a 1-channel tensor");
  }
  const Dims4& d = t.dims();
  constexpr float kInactive = -std::numeric_limits<float>::infinity();
  std::vector<float> dense(d.volume(), kInactive);
  for (std::size_t s = 0; s < t.size(); ++s) {
    dense[t.linear_index(t.site(s))] = t.values_at(s)[0];
  }

  const auto at = [&](int i, int j, int k, int l) {
    return dense[((std::uint64_t(i) * d.a_w + j) * d.b_h + k) * d.b_w + l];
  };

  std::vector<char> winner(d.volume(), 0);
  // Best target for each source cell: scan (k, l) in linearised order and
  // keep the first strict maximum.
  for (int i = 0; i < d.a_h; ++i) {
    for (int j = 0; j < d.a_w; ++j) {
      float best = kInactive;
      int best_k = -1, best_l = -1;
      for (int k = 0; k < d.b_h; ++k) {
        for (int l = 0; l < d.b_w; ++l) {
          if (at(i, j, k, l) > best) {
            best = at(i, j, k, l);
            best_k = k;
            best_l = l;
          }
        }
      }
      if (best_k >= 0 && best > kInactive) {
        winner[((std::uint64_t(i) * d.a_w + j) * d.b_h + best_k) * d.b_w +
               best_l] = 1;
      }
    }
  }
  // And the mirror: best source for each target cell.
  for (int k = 0; k < d.b_h; ++k) {
    for (int l = 0; l < d.b_w; ++l) {
      float best = kInactive;
      int best_i = -1, best_j = -1;
      for (int i = 0; i < d.a_h; ++i) {
        for (int j = 0; j < d.a_w; ++j) {
          if (at(i, j, k, l) > best) {
            best = at(i, j, k, l);
            best_i = i;
            best_j = j;
          }
        }
      }
      if (best_i >= 0 && best > kInactive) {
        winner[((std::uint64_t(best_i) * d.a_w + best_j) * d.b_h + k) * d.b_w +
               l] = 1;
      }
    }
  }

  std::vector<Match> out;
  for (std::size_t s = 0; s < t.size(); ++s) {
    const Site4& site = t.site(s);
    if (winner[t.linear_index(site)]) {
      out.push_back({site.i, site.j, site.k, site.l, t.values_at(s)[0]});
    }
  }
  return out;
}

namespace {

FeatureMap random_map(std::mt19937& rng, int h, int w, int c) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(std::size_t(h) * w * c);
  for (float& v : values) v = dist(rng);
  return FeatureMap::normalised(h, w, c, std::move(values));
}

SparseTensor4D random_tensor(std::mt19937& rng, Dims4 dims, int channels,
                             std::size_t count) {
  std::uniform_int_distribution<int> di(0, dims.a_h - 1);
  std::uniform_int_distribution<int> dj(0, dims.a_w - 1);
  std::uniform_int_distribution<int> dk(0, dims.b_h - 1);
  std::uniform_int_distribution<int> dl(0, dims.b_w - 1);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);

  std::map<std::uint64_t, Site4> picked;
  while (picked.size() < count) {
    const Site4 s{di(rng), dj(rng), dk(rng), dl(rng)};
    const std::uint64_t key =
        ((std::uint64_t(s.i) * dims.a_w + s.j) * dims.b_h + s.k) * dims.b_w +
        s.l;
    picked.emplace(key, s);
  }
  std::vector<Site4> sites;
  std::vector<float> values;
  for (const auto& [key, s] : picked) {
    sites.push_back(s);
    for (int ch = 0; ch < channels; ++ch) values.push_back(dist(rng));
  }
  return SparseTensor4D::from_sorted(dims, channels, std::move(sites),
                                     std::move(values));
}

bool tensors_close(const SparseTensor4D& a, const SparseTensor4D& b,
                   float tol, std::string& why) {
  if (a.dims() != b.dims() || a.channels() != b.channels() ||
      a.size() != b.size()) {
    why = "shape or site count mismatch";
    return false;
  }
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (!(a.site(s) == b.site(s))) {
      why = "site sets differ at position " + std::to_string(s);
      return false;
    }
  }
  const std::span<const float> va = a.values();
  const std::span<const float> vb = b.values();
  for (std::size_t idx = 0; idx < va.size(); ++idx) {
    if (std::abs(va[idx] - vb[idx]) > tol) {
      std::ostringstream os;
      os << "value " << idx << " differs: " << va[idx] << " vs " << vb[idx];
      why = os.str();
      return false;
    }
  }
  return true;
}

class Checker {
 public:
  explicit Checker(std::ostream& log) : log_(log) {}

  void expect(bool ok, const std::string& name, const std::string& why = "") {
    if (ok) {
      log_ << "[ ok ] " << name << "\n";
    } else {
      log_ << "[FAIL] " << name << (why.empty() ? "" : ": " + why) << "\n";
      ++failures_;
    }
  }

  int failures() const { return failures_; }

 private:
  std::ostream& log_;
  int failures_ = 0;
};

} // namespace

int run_selfcheck(std::uint32_t seed, std::ostream& log) {
  std::mt19937 rng(seed);
  Checker check(log);

  // Submanifold network against the masked dense pass.
  for (int round = 0; round < 4; ++round) {
    const Dims4 dims{4 + round % 2, 5, 4, 3 + round % 3};
    SparseTensor4D input = random_tensor(rng, dims, 1, 24);
    const ConvNetwork net = seeded_init(seed * 31 + round, 8);
    const SparseTensor4D got = network_forward(net, input);
    const SparseTensor4D want = masked_network(net, input);
    std::string why;
    check.expect(tensors_close(got, want, 1e-5f, why),
                 "network vs masked dense round " + std::to_string(round), why);
  }

  // Baseline binary-search convolution against the kernel-map variant,
  // which must agree to the bit.
  {
    const Dims4 dims{5, 4, 4, 5};
    SparseTensor4D input = random_tensor(rng, dims, 1, 30);
    const ConvNetwork net = seeded_init(seed + 7, 8);
    const KernelMap map = KernelMap::build(input);
    const SparseTensor4D a = submanifold_conv(input, net.layers[0]);
    const SparseTensor4D b = submanifold_conv(input, net.layers[0], map);
    check.expect(a.values().size() == b.values().size() &&
                     std::memcmp(a.values().data(), b.values().data(),
                                 a.values().size() * sizeof(float)) == 0,
                 "kernel map matches binary-search baseline bitwise");
  }

  // Pruned correlation against full-sort selection.
  for (int round = 0; round < 4; ++round) {
    const FeatureMap a = random_map(rng, 5, 4, 7);
    const FeatureMap b = random_map(rng, 4, 6, 7);
    const CorrConfig cfg{3 + round, true};
    std::string why;
    check.expect(tensors_close(symmetric_correlation(a, b, cfg),
                               symmetric_bruteforce(a, b, cfg), 1e-6f, why),
                 "correlation vs brute force k=" + std::to_string(cfg.k), why);
  }

  // Match extraction against the dense argmax scan.
  for (int round = 0; round < 4; ++round) {
    const Dims4 dims{5, 5, 4, 4};
    SparseTensor4D t = random_tensor(rng, dims, 1, 40);
    const std::vector<Match> got = extract_matches(t);
    const std::vector<Match> want = extract_matches_dense(t);
    bool same = got.size() == want.size();
    for (std::size_t m = 0; same && m < got.size(); ++m) {
      same = got[m].a_row == want[m].a_row && got[m].a_col == want[m].a_col &&
             got[m].b_row == want[m].b_row && got[m].b_col == want[m].b_col &&
             got[m].score == want[m].score;
    }
    check.expect(same, "extraction vs dense scan round " +
                           std::to_string(round));
  }

  // Transposition is an involution and respects values bitwise.
  {
    const Dims4 dims{4, 6, 5, 3};
    SparseTensor4D t = random_tensor(rng, dims, 2, 35);
    const SparseTensor4D back = transpose4d(transpose4d(t));
    std::string why;
    check.expect(tensors_close(t, back, 0.0f, why),
                 "transpose involution", why);
  }

  // Swapping the image order flips the filtered tensor exactly.
  {
    const FeatureMap a = random_map(rng, 5, 4, 8);
    const FeatureMap b = random_map(rng, 4, 5, 8);
    const ConvNetwork net = seeded_init(seed ^ 0x5bd1e995u, 8);
    const CorrConfig cfg{4, true};
    const SparseTensor4D out_ab = permutation_invariant_forward(
        net, symmetric_correlation(a, b, cfg));
    const SparseTensor4D out_ba = permutation_invariant_forward(
        net, symmetric_correlation(b, a, cfg));
    std::string why;
    check.expect(tensors_close(out_ab, transpose4d(out_ba), 1e-5f, why),
                 "image order only transposes the output", why);
  }

  return check.failures();
}

} // namespace sncnet::reference
