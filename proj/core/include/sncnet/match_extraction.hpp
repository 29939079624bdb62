#pragma once

#include <cstddef>
#include <vector>

#include "sncnet/match.hpp"
#include "sncnet/sparse_tensor.hpp"

namespace sncnet {

// A site (i, j, k, l) becomes a match when its value is the maximum among
// active sites sharing (k, l) or among active sites sharing (i, j); inactive
// sites never compete. Ties go to the smallest linearised coordinate, and a
// site that wins both directions is emitted once. Input must be 1-channel.
// Matches come out in canonical site order.
std::vector<Match> extract_matches(const SparseTensor4D& t);

// Descending score, ties towards the smaller A then B coordinate, truncated
// to the best top_n. The order is canonical: any permutation of the input
// ranks identically.
std::vector<Match> rank_matches(std::vector<Match> ms, std::size_t top_n);

} // namespace sncnet
