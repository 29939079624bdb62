#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sncnet/feature_io.hpp"
#include "sncnet/feature_map.hpp"
#include "sncnet/image.hpp"
#include "test_util.hpp"

using namespace sncnet;

TEST_CASE("feature map validates the unit-norm invariant") {
  CHECK_NOTHROW(FeatureMap(1, 1, 2, {1.0f, 0.0f}));
  CHECK_NOTHROW(FeatureMap(1, 1, 2, {0.0f, 0.0f})); // zero padding cell
  CHECK_THROWS_AS(FeatureMap(1, 1, 2, {1.0f, 1.0f}), DataError);
  CHECK_THROWS_AS(FeatureMap(1, 1, 1, {NAN}), DataError);
  CHECK_THROWS_AS(FeatureMap(1, 2, 1, {1.0f}), ShapeError);
  CHECK_THROWS_AS(FeatureMap(1, 1, 1, {1.0f}, {0.0f, 1.0f}), ShapeError);

  const FeatureMap norm = FeatureMap::normalised(1, 1, 2, {3.0f, 4.0f});
  CHECK(norm.descriptor(0, 0)[0] == doctest::Approx(0.6f));
  CHECK(norm.descriptor(0, 0)[1] == doctest::Approx(0.8f));
}

TEST_CASE("grid cell centres map into pixel coordinates") {
  const FeatureMap map = testutil::random_map(1, 4, 4, 3, {4.0f, 4.0f});
  // pixel = (coord + 0.5) * scale - 0.5
  const PixelPoint p00 = map.grid_to_pixel(0, 0);
  CHECK(p00.x == doctest::Approx(1.5));
  CHECK(p00.y == doctest::Approx(1.5));
  const PixelPoint p12 = map.grid_to_pixel(1.0, 2.5);
  CHECK(p12.x == doctest::Approx(11.5));
  CHECK(p12.y == doctest::Approx(5.5));
}

TEST_CASE("patch descriptors are mean-free unit vectors") {
  // One 2x2 patch with pixels 0, 1, 2, 3: mean 1.5, centred residuals
  // (-1.5, -0.5, 0.5, 1.5), norm sqrt(5).
  GrayImage img{2, 2, {0.0f, 1.0f, 2.0f, 3.0f}};
  const FeatureMap map = extract_patch_descriptors(img, 2, 1);

  REQUIRE(map.height() == 1);
  REQUIRE(map.width() == 1);
  REQUIRE(map.channels() == 4);
  const float inv = 1.0f / std::sqrt(5.0f);
  CHECK(map.descriptor(0, 0)[0] == doctest::Approx(-1.5f * inv));
  CHECK(map.descriptor(0, 0)[1] == doctest::Approx(-0.5f * inv));
  CHECK(map.descriptor(0, 0)[2] == doctest::Approx(0.5f * inv));
  CHECK(map.descriptor(0, 0)[3] == doctest::Approx(1.5f * inv));
  CHECK(map.pixel_scale() == PixelScale{1.0f, 1.0f});
}

TEST_CASE("patch grid extent follows floor((size - patch) / stride) + 1") {
  GrayImage img{13, 18, std::vector<float>(13 * 18, 0.0f)};
  for (int y = 0; y < 13; ++y)
    for (int x = 0; x < 18; ++x) img.pixels[y * 18 + x] = float((y * 31 + x * 7) % 256);

  const FeatureMap map = extract_patch_descriptors(img, 4, 3);
  CHECK(map.height() == (13 - 4) / 3 + 1);
  CHECK(map.width() == (18 - 4) / 3 + 1);
  CHECK(map.channels() == 16);
  CHECK(map.pixel_scale() == PixelScale{3.0f, 3.0f});

  // A constant image has no texture anywhere: every cell is zero padding.
  GrayImage flat{6, 6, std::vector<float>(36, 9.0f)};
  const FeatureMap zero = extract_patch_descriptors(flat, 4, 2);
  for (float v : zero.values()) CHECK(v == 0.0f);

  CHECK_THROWS_AS(extract_patch_descriptors(img, 1, 1), ShapeError);
  CHECK_THROWS_AS(extract_patch_descriptors(img, 4, 0), ShapeError);
  CHECK_THROWS_AS(extract_patch_descriptors(GrayImage{2, 2, {1, 2, 3, 4}}, 3, 1),
                  ShapeError);
}

TEST_CASE("2x2 max pooling keeps the per-channel maximum") {
  // Four cells with orthogonal unit descriptors; the pooled cell sees the
  // channelwise max (1, 1) and is renormalised to unit length.
  const std::vector<float> values = {
      1.0f, 0.0f, // (0,0)
      0.0f, 1.0f, // (0,1)
      1.0f, 0.0f, // (1,0)
      0.0f, 1.0f, // (1,1)
  };
  const FeatureMap fine(2, 2, 2, values, {2.0f, 2.0f});

  const FeatureMap pooled = maxpool2x2(fine);
  REQUIRE(pooled.height() == 1);
  REQUIRE(pooled.width() == 1);
  const float r = 1.0f / std::sqrt(2.0f);
  CHECK(pooled.descriptor(0, 0)[0] == doctest::Approx(r));
  CHECK(pooled.descriptor(0, 0)[1] == doctest::Approx(r));
  CHECK(pooled.pixel_scale() == PixelScale{4.0f, 4.0f});

  const FeatureMap raw = maxpool2x2(fine, false);
  CHECK(raw.descriptor(0, 0)[0] == 1.0f);
  CHECK(raw.descriptor(0, 0)[1] == 1.0f);
}

TEST_CASE("pooling drops an odd trailing row and column") {
  const FeatureMap fine = testutil::random_map(3, 5, 7, 4);
  const FeatureMap pooled = maxpool2x2(fine);
  CHECK(pooled.height() == 2);
  CHECK(pooled.width() == 3);

  // Each pooled value must equal the max over its 2x2 block.
  for (int y = 0; y < pooled.height(); ++y)
    for (int x = 0; x < pooled.width(); ++x)
      for (int ch = 0; ch < 4; ++ch) {
        float m = fine.descriptor(2 * y, 2 * x)[ch];
        m = std::max(m, fine.descriptor(2 * y, 2 * x + 1)[ch]);
        m = std::max(m, fine.descriptor(2 * y + 1, 2 * x)[ch]);
        m = std::max(m, fine.descriptor(2 * y + 1, 2 * x + 1)[ch]);
        // Undo the renormalisation before comparing.
        float norm = 0.0f;
        for (int c2 = 0; c2 < 4; ++c2) {
          float v = fine.descriptor(2 * y, 2 * x)[c2];
          v = std::max(v, fine.descriptor(2 * y, 2 * x + 1)[c2]);
          v = std::max(v, fine.descriptor(2 * y + 1, 2 * x)[c2]);
          v = std::max(v, fine.descriptor(2 * y + 1, 2 * x + 1)[c2]);
          norm += v * v;
        }
        norm = std::sqrt(norm);
        CHECK(pooled.descriptor(y, x)[ch] == doctest::Approx(m / norm).epsilon(1e-5));
      }
}

TEST_CASE("feature maps roundtrip through the binary container") {
  testutil::TempDir dir;
  const FeatureMap map = testutil::random_map(9, 6, 5, 8, {4.0f, 4.0f});
  const std::string path = dir.file("m.sncf");
  save_feature_map(map, path);
  const FeatureMap back = load_feature_map(path);

  CHECK(back.height() == map.height());
  CHECK(back.width() == map.width());
  CHECK(back.channels() == map.channels());
  CHECK(back.pixel_scale() == map.pixel_scale());
  CHECK(std::memcmp(back.values().data(), map.values().data(),
                    map.values().size() * sizeof(float)) == 0);
}

TEST_CASE("feature map loading rejects corrupted files") {
  testutil::TempDir dir;
  const FeatureMap map = testutil::random_map(10, 3, 3, 4);
  const std::string path = dir.file("m.sncf");
  save_feature_map(map, path);

  SUBCASE("wrong magic") {
    auto data = [&] {
      std::ifstream in(path, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    }();
    data[1] = '?';
    std::ofstream(path, std::ios::binary) << data;
    CHECK_THROWS_AS(load_feature_map(path), FormatError);
  }
  SUBCASE("truncated") {
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 3);
    CHECK_THROWS_AS(load_feature_map(path), TruncationError);
  }
}

TEST_CASE("images parse from both binary and ascii formats") {
  testutil::TempDir dir;

  SUBCASE("P5 binary grayscale") {
    const std::string path = dir.file("img.pgm");
    std::ofstream(path, std::ios::binary) << "P5\n# a comment\n3 2\n255\n"
                                          << std::string("\x00\x7f\xff\x10\x20\x30", 6);
    const GrayImage img = load_pnm(path);
    REQUIRE(img.height == 2);
    REQUIRE(img.width == 3);
    CHECK(img.at(0, 0) == 0.0f);
    CHECK(img.at(0, 1) == 127.0f);
    CHECK(img.at(0, 2) == 255.0f);
    CHECK(img.at(1, 2) == 48.0f);
  }
  SUBCASE("P2 ascii grayscale") {
    const std::string path = dir.file("img.pgm");
    std::ofstream(path) << "P2\n2 2\n255\n0 64\n128 255\n";
    const GrayImage img = load_pnm(path);
    CHECK(img.at(0, 1) == 64.0f);
    CHECK(img.at(1, 0) == 128.0f);
  }
  SUBCASE("P6 colour maps through the luminance weights") {
    const std::string path = dir.file("img.ppm");
    // One pure-red pixel: luminance 0.299 * 255.
    std::ofstream(path, std::ios::binary) << "P6\n1 1\n255\n"
                                          << std::string("\xff\x00\x00", 3);
    const GrayImage img = load_pnm(path);
    CHECK(img.at(0, 0) == doctest::Approx(0.299f * 255.0f));
  }
  SUBCASE("garbage is rejected") {
    const std::string path = dir.file("img.pgm");
    std::ofstream(path) << "P7\n1 1\n255\n0\n";
    CHECK_THROWS_AS(load_pnm(path), FormatError);
  }

  SUBCASE("pgm save and reload") {
    GrayImage img{2, 3, {0.0f, 10.4f, 10.6f, 200.0f, 255.0f, 300.0f}};
    const std::string path = dir.file("out.pgm");
    save_pgm(img, path);
    const GrayImage back = load_pnm(path);
    CHECK(back.at(0, 0) == 0.0f);
    CHECK(back.at(0, 1) == 10.0f);  // rounds down
    CHECK(back.at(0, 2) == 11.0f);  // rounds up
    CHECK(back.at(1, 2) == 255.0f); // clamps
  }
}
