#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sncnet/conv_network.hpp"
#include "sncnet/correlation.hpp"
#include "sncnet/feature_map.hpp"
#include "sncnet/match.hpp"
#include "sncnet/relocalisation.hpp"

namespace sncnet {

struct PipelineConfig {
  CorrConfig corr;
  RelocConfig reloc;
  // Matches kept after ranking by filtered score.
  std::size_t top_n = 1000;
  // 0 keeps the machine default; otherwise caps worker threads for the call.
  int threads = 0;
};

// Size and timing facts gathered while matching one pair.
struct PairMetrics {
  std::size_t active_sites = 0;          // correlation sites before filtering
  std::uint64_t storage_bytes = 0;       // packed payload at one channel
  std::uint64_t storage_bytes_aligned = 0;
  std::uint64_t dense_equivalent_bytes = 0;
  std::uint64_t peak_tensor_bytes = 0;   // live tensor high-water mark
  double wall_seconds = 0.0;
};

struct MatchPairResult {
  std::vector<RefinedMatch> matches;
  PairMetrics metrics;
};

// Full matching pass for one image pair: pools the fine maps, builds the
// pruned correlation volume, filters it with the network, extracts and ranks
// matches, then relocalises them against the fine maps. Fine maps need even
// height and width and a shared channel count.
MatchPairResult match_pair(const FeatureMap& fine_a, const FeatureMap& fine_b,
                           const ConvNetwork& net, const PipelineConfig& cfg);

// Five columns, header xA,yA,xB,yB,score, fixed six decimals.
std::string matches_to_csv(std::span<const RefinedMatch> matches);
void write_matches_csv(const std::string& path,
                       std::span<const RefinedMatch> matches);

struct RunReport {
  std::vector<std::string> pair_ids;
  std::vector<MatchPairResult> results;
};

struct PairInput {
  std::string id;
  const FeatureMap* fine_a = nullptr;
  const FeatureMap* fine_b = nullptr;
};

RunReport match_report(std::span<const PairInput> pairs,
                       const ConvNetwork& net, const PipelineConfig& cfg);

// Metrics per pair as a JSON document (matches are left to the CSV writer).
std::string report_to_json(const RunReport& report);

} // namespace sncnet
