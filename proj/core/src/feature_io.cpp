// Feature-map container and the two grid producers (patch descriptors,
// 2x2 pooling).

#include "sncnet/feature_io.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "detail/io_util.hpp"
#include "sncnet/threading.hpp"

namespace sncnet {

void save_feature_map(const FeatureMap& map, const std::string& path) {
  auto os = detail::open_output(path);
  detail::put_magic(os, "SNCF");
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(map.height()));
  detail::put_u32(os, static_cast<std::uint32_t>(map.width()));
  detail::put_u32(os, static_cast<std::uint32_t>(map.channels()));
  detail::put_f32(os, map.pixel_scale().sy);
  detail::put_f32(os, map.pixel_scale().sx);
  detail::put_f32_array(os, map.values());
  if (!os) throw IoError("write failed: " + path);
}

FeatureMap load_feature_map(const std::string& path) {
  auto is = detail::open_input(path);
  detail::expect_magic(is, "SNCF");
  detail::expect_version(is, 1);
  const auto h = detail::get_u32(is, "height");
  const auto w = detail::get_u32(is, "width");
  const auto c = detail::get_u32(is, "channels");
  PixelScale scale;
  scale.sy = detail::get_f32(is, "pixel scale");
  scale.sx = detail::get_f32(is, "pixel scale");
  if (h < 1 || w < 1 || c < 1) throw DataError("feature map dims must be positive");
  const std::uint64_t count = std::uint64_t(h) * w * c;
  if (count > (std::uint64_t(1) << 31))
    throw DataError("implausible feature map size");
  if (!std::isfinite(scale.sy) || !std::isfinite(scale.sx) || scale.sy <= 0.0f ||
      scale.sx <= 0.0f)
    throw DataError("pixel scale must be positive and finite");

  std::vector<float> values(count);
  detail::get_f32_array(is, values, "descriptor values");
  for (const float v : values)
    if (!std::isfinite(v)) throw DataError("non-finite descriptor value");

  // Tolerance repair: renormalise only descriptors that drifted beyond the
  // invariant, leaving valid payloads bit-exact.
  const std::size_t cells = std::size_t(h) * w;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    float* d = values.data() + cell * c;
    double nn = 0.0;
    for (std::uint32_t ch = 0; ch < c; ++ch) nn += double(d[ch]) * d[ch];
    if (nn == 0.0) continue;
    const double norm = std::sqrt(nn);
    if (std::abs(norm - 1.0) <= kNormTolerance) continue;
    const double inv = 1.0 / norm;
    for (std::uint32_t ch = 0; ch < c; ++ch)
      d[ch] = static_cast<float>(d[ch] * inv);
  }
  return FeatureMap(static_cast<int>(h), static_cast<int>(w),
                    static_cast<int>(c), std::move(values), scale);
}

FeatureMap extract_patch_descriptors(const GrayImage& image, int patch,
                                     int stride) {
  if (patch < 2) throw ShapeError("patch must span at least 2 pixels");
  if (stride < 1) throw ShapeError("stride must be positive");
  if (image.height < patch || image.width < patch)
    throw ShapeError("image smaller than one patch");
  if (image.pixels.size() != std::size_t(image.height) * image.width)
    throw ShapeError("inconsistent image dims");

  const int h = (image.height - patch) / stride + 1;
  const int w = (image.width - patch) / stride + 1;
  const int c = patch * patch;
  std::vector<float> values(std::size_t(h) * w * c);

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int gy = 0; gy < h; ++gy) {
    std::vector<float> patch_px(c);
    for (int gx = 0; gx < w; ++gx) {
      const int y0 = gy * stride;
      const int x0 = gx * stride;
      double sum = 0.0;
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px) {
          const float v = image.at(y0 + py, x0 + px);
          patch_px[py * patch + px] = v;
          sum += v;
        }
      const double mean = sum / c;
      double nn = 0.0;
      for (int idx = 0; idx < c; ++idx) {
        const double centred = patch_px[idx] - mean;
        patch_px[idx] = static_cast<float>(centred);
        nn += centred * centred;
      }
      float* out = values.data() + (std::size_t(gy) * w + gx) * c;
      if (nn == 0.0) { // constant patch becomes a zero (padding) cell
        for (int idx = 0; idx < c; ++idx) out[idx] = 0.0f;
      } else {
        const double inv = 1.0 / std::sqrt(nn);
        for (int idx = 0; idx < c; ++idx)
          out[idx] = static_cast<float>(patch_px[idx] * inv);
      }
    }
  }
  return FeatureMap(h, w, c, std::move(values),
                    {static_cast<float>(stride), static_cast<float>(stride)});
}

FeatureMap maxpool2x2(const FeatureMap& fine, bool renormalise) {
  const int h = fine.height() / 2;
  const int w = fine.width() / 2;
  if (h < 1 || w < 1) throw ShapeError("feature map too small to pool");
  const int c = fine.channels();
  std::vector<float> values(std::size_t(h) * w * c);

#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (int oy = 0; oy < h; ++oy) {
    for (int ox = 0; ox < w; ++ox) {
      const auto d00 = fine.descriptor(2 * oy, 2 * ox);
      const auto d01 = fine.descriptor(2 * oy, 2 * ox + 1);
      const auto d10 = fine.descriptor(2 * oy + 1, 2 * ox);
      const auto d11 = fine.descriptor(2 * oy + 1, 2 * ox + 1);
      float* out = values.data() + (std::size_t(oy) * w + ox) * c;
      double nn = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        float m = d00[ch];
        if (d01[ch] > m) m = d01[ch];
        if (d10[ch] > m) m = d10[ch];
        if (d11[ch] > m) m = d11[ch];
        out[ch] = m;
        nn += double(m) * m;
      }
      if (renormalise && nn != 0.0) {
        const double inv = 1.0 / std::sqrt(nn);
        for (int ch = 0; ch < c; ++ch)
          out[ch] = static_cast<float>(out[ch] * inv);
      }
    }
  }
  const PixelScale scale{fine.pixel_scale().sy * 2.0f,
                         fine.pixel_scale().sx * 2.0f};
  return renormalise ? FeatureMap(h, w, c, std::move(values), scale)
                     : FeatureMap::unvalidated(h, w, c, std::move(values), scale);
}

} // namespace sncnet
