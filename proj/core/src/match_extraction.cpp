// Mutual-argmax match extraction over the filtered correlation tensor.

#include "sncnet/match_extraction.hpp"

#include <algorithm>
#include <numeric>

namespace sncnet {

std::vector<Match> extract_matches(const SparseTensor4D& t) {
  if (t.channels() != 1)
    throw ShapeError("match extraction expects a 1-channel tensor");
  const std::size_t n = t.size();
  const auto sites = t.sites();
  const auto vals = t.values();
  std::vector<char> winner(n, 0);

  // Direction 1: best (k, l) for each (i, j). The canonical order keeps
  // (i, j) groups contiguous and each group ascending in (k, l), so keeping
  // the first strict maximum is exactly the smallest-coordinate tie break.
  std::size_t g = 0;
  while (g < n) {
    std::size_t best = g;
    std::size_t e = g;
    for (; e < n && sites[e].i == sites[g].i && sites[e].j == sites[g].j; ++e)
      if (vals[e] > vals[best]) best = e;
    winner[best] = 1;
    g = e;
  }

  // Direction 2: best (i, j) for each (k, l). Group order comes from a sort
  // by (k, l) that keeps the canonical position as the secondary key, so the
  // first strict maximum again means the smallest linearised coordinate.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (sites[a].k != sites[b].k) return sites[a].k < sites[b].k;
    if (sites[a].l != sites[b].l) return sites[a].l < sites[b].l;
    return a < b;
  });
  g = 0;
  while (g < n) {
    std::size_t best = g;
    std::size_t e = g;
    for (; e < n && sites[order[e]].k == sites[order[g]].k &&
           sites[order[e]].l == sites[order[g]].l;
         ++e)
      if (vals[order[e]] > vals[order[best]]) best = e;
    winner[order[best]] = 1;
    g = e;
  }

  std::vector<Match> out;
  for (std::size_t s = 0; s < n; ++s)
    if (winner[s])
      out.push_back(
          {sites[s].i, sites[s].j, sites[s].k, sites[s].l, vals[s]});
  return out;
}

std::vector<Match> rank_matches(std::vector<Match> ms, std::size_t top_n) {
  std::sort(ms.begin(), ms.end(), [](const Match& a, const Match& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.a_row != b.a_row) return a.a_row < b.a_row;
    if (a.a_col != b.a_col) return a.a_col < b.a_col;
    if (a.b_row != b.b_row) return a.b_row < b.b_row;
    return a.b_col < b.b_col;
  });
  if (ms.size() > top_n) ms.resize(top_n);
  return ms;
}

} // namespace sncnet
