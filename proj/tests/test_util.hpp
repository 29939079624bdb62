#pragma once

// Shared fixtures for the test binaries: seeded random inputs and a
// self-cleaning scratch directory.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sncnet/feature_map.hpp"
#include "sncnet/sparse_tensor.hpp"

namespace testutil {

inline sncnet::FeatureMap random_map(std::uint32_t seed, int h, int w, int c,
                                     sncnet::PixelScale scale = {}) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> values(std::size_t(h) * w * c);
  for (float& v : values) v = dist(rng);
  return sncnet::FeatureMap::normalised(h, w, c, std::move(values), scale);
}

inline sncnet::SparseTensor4D random_tensor(std::uint32_t seed,
                                            sncnet::Dims4 dims, int channels,
                                            std::size_t count) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> di(0, dims.a_h - 1);
  std::uniform_int_distribution<int> dj(0, dims.a_w - 1);
  std::uniform_int_distribution<int> dk(0, dims.b_h - 1);
  std::uniform_int_distribution<int> dl(0, dims.b_w - 1);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);

  std::map<std::uint64_t, sncnet::Site4> picked;
  while (picked.size() < count) {
    const sncnet::Site4 s{di(rng), dj(rng), dk(rng), dl(rng)};
    const std::uint64_t key =
        ((std::uint64_t(s.i) * dims.a_w + s.j) * dims.b_h + s.k) * dims.b_w +
        s.l;
    picked.emplace(key, s);
  }
  std::vector<sncnet::Site4> sites;
  std::vector<float> values;
  for (const auto& [key, s] : picked) {
    sites.push_back(s);
    for (int ch = 0; ch < channels; ++ch) values.push_back(dist(rng));
  }
  return sncnet::SparseTensor4D::from_sorted(dims, channels, std::move(sites),
                                             std::move(values));
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sncnet_test_" + std::to_string(counter.fetch_add(1)) + "_" +
             std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

} // namespace testutil
