#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "sncnet/correlation.hpp"
#include "sncnet/reference.hpp"
#include "test_util.hpp"

using namespace sncnet;

TEST_CASE("top-k keeps exactly k sites per source cell") {
  const FeatureMap a = testutil::random_map(1, 4, 5, 6);
  const FeatureMap b = testutil::random_map(2, 3, 6, 6);
  const int k = 4;
  const SparseTensor4D t = topk_correlation(a, b, k);

  CHECK(t.dims() == Dims4{4, 5, 3, 6});
  CHECK(t.channels() == 1);
  CHECK(t.size() == std::size_t(4 * 5 * k));

  std::map<std::pair<int, int>, int> per_cell;
  for (const Site4& s : t.sites()) ++per_cell[{s.i, s.j}];
  for (const auto& [cell, count] : per_cell) CHECK(count == k);
}

TEST_CASE("kept similarities dominate the discarded ones") {
  const FeatureMap a = testutil::random_map(3, 3, 4, 8);
  const FeatureMap b = testutil::random_map(4, 5, 4, 8);
  const int k = 5;
  const SparseTensor4D t = topk_correlation(a, b, k);

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) {
      // Smallest kept similarity for this source cell.
      float kept_min = 1e30f;
      std::set<std::pair<int, int>> kept;
      for (std::size_t s = 0; s < t.size(); ++s) {
        if (t.site(s).i != i || t.site(s).j != j) continue;
        kept_min = std::min(kept_min, t.values_at(s)[0]);
        kept.insert({t.site(s).k, t.site(s).l});
      }
      // Every skipped candidate must not beat it.
      for (int kk = 0; kk < 5; ++kk)
        for (int ll = 0; ll < 4; ++ll) {
          if (kept.count({kk, ll})) continue;
          float sim = 0.0f;
          for (int ch = 0; ch < 8; ++ch)
            sim += a.descriptor(i, j)[ch] * b.descriptor(kk, ll)[ch];
          CHECK(sim <= kept_min + 1e-6f);
        }
    }
  }
}

TEST_CASE("identical maps put the self-similarity 1 in the top slot") {
  const FeatureMap a = testutil::random_map(5, 4, 4, 16);
  const SparseTensor4D t = topk_correlation(a, a, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const auto hit = t.find({i, j, i, j});
      REQUIRE(hit.has_value());
      CHECK(t.values_at(*hit)[0] == doctest::Approx(1.0f).epsilon(1e-4));
    }
}

TEST_CASE("both selection branches agree with the brute-force oracle") {
  // Small k exercises the sorted-window branch, near-dense k the full sort.
  const FeatureMap a = testutil::random_map(6, 5, 4, 7);
  const FeatureMap b = testutil::random_map(7, 4, 5, 7);
  for (const int k : {1, 2, 6, 19, 20}) {
    const SparseTensor4D fast = topk_correlation(a, b, k);
    const SparseTensor4D slow = reference::topk_bruteforce(a, b, k);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t s = 0; s < fast.size(); ++s) {
      CHECK(fast.site(s) == slow.site(s));
      CHECK(fast.values_at(s)[0] == doctest::Approx(slow.values_at(s)[0]).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(topk_correlation(a, b, 0), ShapeError);
  CHECK_THROWS_AS(topk_correlation(a, b, 21), ShapeError);
  CHECK_THROWS_AS(topk_correlation(a, testutil::random_map(8, 4, 5, 6), 2),
                  ShapeError);
}

TEST_CASE("symmetric correlation merges both directions") {
  const FeatureMap a = testutil::random_map(9, 5, 4, 10);
  const FeatureMap b = testutil::random_map(10, 4, 6, 10);
  const CorrConfig cfg{6, true};
  const SparseTensor4D sym = symmetric_correlation(a, b, cfg);

  // Site count is bounded by both passes and below by either alone.
  CHECK(sym.size() <= std::size_t(2 * 6) * (5 * 4));
  CHECK(sym.size() >= std::size_t(6) * (5 * 4));

  const SparseTensor4D oracle = reference::symmetric_bruteforce(a, b, cfg);
  REQUIRE(sym.size() == oracle.size());
  for (std::size_t s = 0; s < sym.size(); ++s) {
    CHECK(sym.site(s) == oracle.site(s));
    CHECK(sym.values_at(s)[0] == doctest::Approx(oracle.values_at(s)[0]).epsilon(1e-6));
  }

  // Swapping the operands transposes the result exactly.
  const SparseTensor4D swapped = symmetric_correlation(b, a, cfg);
  const SparseTensor4D back = transpose4d(swapped);
  REQUIRE(back.size() == sym.size());
  for (std::size_t s = 0; s < sym.size(); ++s) {
    CHECK(back.site(s) == sym.site(s));
    CHECK(back.values_at(s)[0] == sym.values_at(s)[0]);
  }

  // One-way mode skips the reverse pass.
  const SparseTensor4D one_way = symmetric_correlation(a, b, {6, false});
  CHECK(one_way.size() == std::size_t(6) * (5 * 4));
}

TEST_CASE("storage arithmetic reflects the coordinate-plus-value layout") {
  // 16 coordinate bytes plus one 4-byte value, padded to 24 when aligned.
  CHECK(sparse_storage_bytes(150000, 1) == 3000000);
  CHECK(sparse_storage_bytes_aligned(150000, 1) == 3600000);
  CHECK(sparse_storage_bytes_aligned(600000, 1) == 14400000);
  // A 16-channel payload is already 8-byte aligned.
  CHECK(sparse_storage_bytes(100, 16) == sparse_storage_bytes_aligned(100, 16));

  const Dims4 dims{100, 75, 100, 75};
  CHECK(dense_equivalent_bytes(dims) == 225000000ull);
  CHECK(dense_equivalent_bytes({200, 150, 200, 150}) == 3600000000ull);

  // Expressed in binary megabytes these are the familiar headline numbers.
  CHECK(double(dense_equivalent_bytes(dims)) / (1024.0 * 1024.0) ==
        doctest::Approx(214.58).epsilon(1e-4));
  CHECK(double(sparse_storage_bytes_aligned(150000, 1)) / (1024.0 * 1024.0) ==
        doctest::Approx(3.43).epsilon(1e-3));

  const SparseTensor4D t = testutil::random_tensor(11, {4, 4, 4, 4}, 2, 30);
  CHECK(storage_bytes(t) == 30 * (16 + 8));
  CHECK(storage_bytes_aligned(t) == 30 * 24);
}
