#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "sncnet/conv_network.hpp"
#include "sncnet/correlation.hpp"
#include "sncnet/match.hpp"
#include "sncnet/sparse_tensor.hpp"

// Slow, obviously-correct counterparts of the production kernels. They favour
// directness over speed and exist purely so tests and the selfcheck command
// can cross-examine the fast paths.
namespace sncnet::reference {

// Zero-filled dense copy of a sparse tensor.
DenseTensor4D densify(const SparseTensor4D& t);

// Dense 3^4 convolution written as a scatter over input cells (the
// production oracle gathers per output cell), so the two implementations
// share no loop structure.
DenseTensor4D conv4d_scatter(const DenseTensor4D& input,
                             const ConvLayer& layer);

// Dense forward pass re-masked to the active set after every layer, which is
// what the submanifold rule computes: inactive coordinates stay zero, so
// they feed nothing into the next layer.
SparseTensor4D masked_network(const ConvNetwork& net,
                              const SparseTensor4D& input);

// Full-sort top-k selection per source cell.
SparseTensor4D topk_bruteforce(const FeatureMap& src, const FeatureMap& dst,
                               int k);
// Merged two-direction correlation accumulated through an explicit map.
SparseTensor4D symmetric_bruteforce(const FeatureMap& a, const FeatureMap& b,
                                    const CorrConfig& cfg);

// Match extraction by explicit row/column argmax scans over a dense copy
// padded with -inf at inactive coordinates.
std::vector<Match> extract_matches_dense(const SparseTensor4D& t);

// Runs a battery of randomized cross-checks between the production kernels
// and these references, logging one line per check. Returns the number of
// failed checks (0 means healthy).
int run_selfcheck(std::uint32_t seed, std::ostream& log);

} // namespace sncnet::reference
