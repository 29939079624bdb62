#include "sncnet/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "sncnet/error.hpp"
#include "sncnet/feature_io.hpp"
#include "sncnet/match_extraction.hpp"
#include "sncnet/threading.hpp"

namespace sncnet {

namespace {

// Applies a thread cap for the duration of one call and puts the previous
// effective value back afterwards, including on the exception path.
class ScopedThreadCap {
 public:
  explicit ScopedThreadCap(int cap) : previous_(max_threads()) {
    if (cap > 0) {
      set_max_threads(cap);
      active_ = true;
    }
  }
  ~ScopedThreadCap() {
    if (active_) set_max_threads(previous_);
  }
  ScopedThreadCap(const ScopedThreadCap&) = delete;
  ScopedThreadCap& operator=(const ScopedThreadCap&) = delete;

 private:
  int previous_;
  bool active_ = false;
};

} // namespace

MatchPairResult match_pair(const FeatureMap& fine_a, const FeatureMap& fine_b,
                           const ConvNetwork& net, const PipelineConfig& cfg) {
  if (fine_a.channels() != fine_b.channels()) {
    throw ShapeError("fine maps disagree on channel count");
  }
  if (fine_a.height() % 2 != 0 || fine_a.width() % 2 != 0 ||
      fine_b.height() % 2 != 0 || fine_b.width() % 2 != 0) {
    throw ShapeError("fine maps need even height and width so every coarse "
                     "cell has a full 2x2 fine block");
  }
  net.validate();

  ScopedThreadCap cap(cfg.threads);
  const auto start = std::chrono::steady_clock::now();
  TensorMemoryStats::reset_peak();

  const FeatureMap coarse_a = maxpool2x2(fine_a);
  const FeatureMap coarse_b = maxpool2x2(fine_b);

  MatchPairResult out;
  std::vector<Match> ranked;
  {
    SparseTensor4D corr = symmetric_correlation(coarse_a, coarse_b, cfg.corr);
    out.metrics.active_sites = corr.size();
    out.metrics.storage_bytes = storage_bytes(corr);
    out.metrics.storage_bytes_aligned = storage_bytes_aligned(corr);
    out.metrics.dense_equivalent_bytes = dense_equivalent_bytes(corr.dims());

    SparseTensor4D filtered =
        permutation_invariant_forward(net, std::move(corr));
    ranked = rank_matches(extract_matches(filtered), cfg.top_n);
    // `filtered` dies here, before relocalisation touches the fine maps.
  }

  out.matches = refine_all(ranked, fine_a, fine_b, cfg.reloc);

  out.metrics.peak_tensor_bytes = TensorMemoryStats::peak_bytes();
  out.metrics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

std::string matches_to_csv(std::span<const RefinedMatch> matches) {
  std::string out = "xA,yA,xB,yB,score\n";
  char buf[192];
  for (const RefinedMatch& m : matches) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f,%.6f\n", m.pixel_a.x,
                  m.pixel_a.y, m.pixel_b.x, m.pixel_b.y,
                  static_cast<double>(m.score));
    out += buf;
  }
  return out;
}

void write_matches_csv(const std::string& path,
                       std::span<const RefinedMatch> matches) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open match file for writing: " + path);
  }
  const std::string csv = matches_to_csv(matches);
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) {
    throw IoError("failed writing match file: " + path);
  }
}

RunReport match_report(std::span<const PairInput> pairs,
                       const ConvNetwork& net, const PipelineConfig& cfg) {
  RunReport report;
  report.pair_ids.reserve(pairs.size());
  report.results.reserve(pairs.size());
  // Pairs run one after another: each match_pair call is parallel inside,
  // and sequencing keeps the tensor high-water mark per pair meaningful.
  for (const PairInput& p : pairs) {
    if (p.fine_a == nullptr || p.fine_b == nullptr) {
      throw DataError("pair input '" + p.id + "' is missing a feature map");
    }
    report.pair_ids.push_back(p.id);
    report.results.push_back(match_pair(*p.fine_a, *p.fine_b, net, cfg));
  }
  return report;
}

std::string report_to_json(const RunReport& report) {
  nlohmann::json root;
  root["pairs"] = nlohmann::json::array();
  for (std::size_t idx = 0; idx < report.results.size(); ++idx) {
    const PairMetrics& m = report.results[idx].metrics;
    nlohmann::json entry;
    entry["id"] = report.pair_ids[idx];
    entry["match_count"] = report.results[idx].matches.size();
    entry["active_sites"] = m.active_sites;
    entry["storage_bytes"] = m.storage_bytes;
    entry["storage_bytes_aligned"] = m.storage_bytes_aligned;
    entry["dense_equivalent_bytes"] = m.dense_equivalent_bytes;
    entry["peak_tensor_bytes"] = m.peak_tensor_bytes;
    entry["wall_seconds"] = m.wall_seconds;
    root["pairs"].push_back(std::move(entry));
  }
  return root.dump(2);
}

} // namespace sncnet
