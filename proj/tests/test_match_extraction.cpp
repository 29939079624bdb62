#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "sncnet/match_extraction.hpp"
#include "sncnet/reference.hpp"
#include "test_util.hpp"

using namespace sncnet;

TEST_CASE("a site can win through either of its two groups") {
  // Site (0,0,1,1) loses the (0,0) source group to the 5 but is the only
  // candidate for target cell (1,1), so both sites come out.
  const SparseTensor4D t = SparseTensor4D::from_sorted(
      {2, 2, 2, 2}, 1, {{0, 0, 0, 0}, {0, 0, 1, 1}}, {5.0f, 3.0f});
  const std::vector<Match> ms = extract_matches(t);

  REQUIRE(ms.size() == 2);
  CHECK(ms[0].a_row == 0);
  CHECK(ms[0].b_row == 0);
  CHECK(ms[0].score == 5.0f);
  CHECK(ms[1].b_row == 1);
  CHECK(ms[1].b_col == 1);
  CHECK(ms[1].score == 3.0f);
}

TEST_CASE("ties resolve to the smallest linearised coordinate") {
  // (0,0,0,0) and (0,0,0,1) tie in the (0,0) source group; the first wins.
  // (0,0,0,1) also loses target group (0,1) to the 3, so it is absent.
  const SparseTensor4D t = SparseTensor4D::from_sorted(
      {2, 2, 1, 2}, 1,
      {{0, 0, 0, 0}, {0, 0, 0, 1}, {1, 1, 0, 0}, {1, 1, 0, 1}},
      {2.0f, 2.0f, 1.0f, 3.0f});
  const std::vector<Match> ms = extract_matches(t);

  REQUIRE(ms.size() == 2);
  CHECK((ms[0].a_row == 0 && ms[0].a_col == 0 && ms[0].b_row == 0 &&
         ms[0].b_col == 0));
  CHECK((ms[1].a_row == 1 && ms[1].a_col == 1 && ms[1].b_row == 0 &&
         ms[1].b_col == 1));
}

TEST_CASE("double winners are emitted once") {
  const SparseTensor4D t = SparseTensor4D::from_sorted(
      {1, 1, 1, 1}, 1, {{0, 0, 0, 0}}, {1.0f});
  // The lone site wins both its groups; deduplication keeps one match.
  CHECK(extract_matches(t).size() == 1);
}

TEST_CASE("inactive coordinates never compete") {
  // Target group (0,0) holds only one active site even though the dense
  // tensor would have more cells; absence means no competition.
  const SparseTensor4D t = SparseTensor4D::from_sorted(
      {3, 3, 3, 3}, 1, {{0, 0, 0, 0}, {2, 2, 2, 2}}, {-5.0f, -7.0f});
  const std::vector<Match> ms = extract_matches(t);
  // Negative scores still win: each site is alone in all of its groups.
  CHECK(ms.size() == 2);
}

TEST_CASE("extraction matches the dense argmax oracle on random tensors") {
  for (std::uint32_t seed = 90; seed < 102; ++seed) {
    const SparseTensor4D t =
        testutil::random_tensor(seed, {5, 4, 4, 5}, 1, 35 + seed % 20);
    const std::vector<Match> got = extract_matches(t);
    const std::vector<Match> want = reference::extract_matches_dense(t);
    REQUIRE(got.size() == want.size());
    for (std::size_t m = 0; m < got.size(); ++m) {
      CHECK(got[m].a_row == want[m].a_row);
      CHECK(got[m].a_col == want[m].a_col);
      CHECK(got[m].b_row == want[m].b_row);
      CHECK(got[m].b_col == want[m].b_col);
      CHECK(got[m].score == want[m].score);
    }
  }
}

TEST_CASE("extraction requires the filtered single-channel tensor") {
  CHECK_THROWS_AS(extract_matches(SparseTensor4D({2, 2, 2, 2}, 3)), ShapeError);
  CHECK(extract_matches(SparseTensor4D({2, 2, 2, 2}, 1)).empty());
}

TEST_CASE("ranking orders by score with coordinate tie-breaks") {
  std::vector<Match> ms = {
      {0, 0, 0, 0, 3.0f},
      {1, 0, 0, 0, 1.0f},
      {0, 1, 0, 0, 3.0f},
      {0, 0, 1, 0, 2.0f},
  };
  const std::vector<Match> top = rank_matches(ms, 3);
  REQUIRE(top.size() == 3);
  CHECK((top[0].a_row == 0 && top[0].a_col == 0 && top[0].score == 3.0f));
  CHECK((top[1].a_row == 0 && top[1].a_col == 1 && top[1].score == 3.0f));
  CHECK(top[2].score == 2.0f);

  // Truncation only ever shortens.
  CHECK(rank_matches(ms, 100).size() == 4);
  CHECK(rank_matches(ms, 0).empty());
}

TEST_CASE("ranking is invariant to the input order") {
  std::mt19937 rng(7);
  std::vector<Match> ms;
  for (int idx = 0; idx < 200; ++idx) {
    std::uniform_int_distribution<int> coord(0, 9);
    std::uniform_real_distribution<float> score(-1.0f, 1.0f);
    ms.push_back({coord(rng), coord(rng), coord(rng), coord(rng), score(rng)});
  }
  const std::vector<Match> base = rank_matches(ms, 50);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(ms.begin(), ms.end(), rng);
    const std::vector<Match> again = rank_matches(ms, 50);
    REQUIRE(again.size() == base.size());
    for (std::size_t m = 0; m < base.size(); ++m) {
      CHECK(again[m].a_row == base[m].a_row);
      CHECK(again[m].a_col == base[m].a_col);
      CHECK(again[m].b_row == base[m].b_row);
      CHECK(again[m].b_col == base[m].b_col);
      CHECK(again[m].score == base[m].score);
    }
  }
}
