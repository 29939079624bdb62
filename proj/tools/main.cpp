// Command line front end: descriptor extraction, pair matching, accuracy
// evaluation, storage arithmetic and the library selfcheck.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sncnet/conv_network.hpp"
#include "sncnet/error.hpp"
#include "sncnet/evaluation.hpp"
#include "sncnet/feature_io.hpp"
#include "sncnet/image.hpp"
#include "sncnet/pipeline.hpp"
#include "sncnet/reference.hpp"

namespace {

void metric(const char* key, std::uint64_t value) {
  std::cerr << "#metric " << key << "=" << value << "\n";
}

void metric(const char* key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  std::cerr << "#metric " << key << "=" << buf << "\n";
}

struct ExtractArgs {
  std::string image;
  std::string out;
  int patch = 8;
  int stride = 4;
};

int run_extract(const ExtractArgs& args) {
  const sncnet::GrayImage img = sncnet::load_pnm(args.image);
  const sncnet::FeatureMap map =
      sncnet::extract_patch_descriptors(img, args.patch, args.stride);
  sncnet::save_feature_map(map, args.out);
  std::cerr << "wrote " << map.height() << "x" << map.width() << "x"
            << map.channels() << " feature map to " << args.out << "\n";
  return 0;
}

struct MatchArgs {
  std::string map_a;
  std::string map_b;
  std::string out;
  std::string weights;
  std::string reloc = "hard+soft";
  std::uint32_t seed = 1;
  int hidden = 16;
  int k = 10;
  bool one_way = false;
  std::size_t top_n = 1000;
  float temperature = 10.0f;
  bool temperature_divides = false;
  int threads = 0;
};

int run_match(const MatchArgs& args) {
  const sncnet::FeatureMap fine_a = sncnet::load_feature_map(args.map_a);
  const sncnet::FeatureMap fine_b = sncnet::load_feature_map(args.map_b);
  const sncnet::ConvNetwork net =
      args.weights.empty() ? sncnet::seeded_init(args.seed, args.hidden)
                           : sncnet::load_weights(args.weights);

  sncnet::PipelineConfig cfg;
  cfg.corr.k = args.k;
  cfg.corr.symmetric = !args.one_way;
  if (args.reloc == "none") {
    cfg.reloc.mode = sncnet::RelocMode::none;
  } else if (args.reloc == "hard") {
    cfg.reloc.mode = sncnet::RelocMode::hard;
  } else {
    cfg.reloc.mode = sncnet::RelocMode::hard_soft;
  }
  cfg.reloc.temperature = args.temperature;
  cfg.reloc.temperature_divides = args.temperature_divides;
  cfg.top_n = args.top_n;
  cfg.threads = args.threads;

  const sncnet::MatchPairResult result =
      sncnet::match_pair(fine_a, fine_b, net, cfg);
  sncnet::write_matches_csv(args.out, result.matches);

  const sncnet::PairMetrics& m = result.metrics;
  metric("active_sites", std::uint64_t(m.active_sites));
  metric("storage_bytes", m.storage_bytes);
  metric("storage_bytes_aligned", m.storage_bytes_aligned);
  metric("dense_equivalent_bytes", m.dense_equivalent_bytes);
  metric("peak_tensor_bytes", m.peak_tensor_bytes);
  metric("match_count", std::uint64_t(result.matches.size()));
  metric("wall_seconds", m.wall_seconds);
  return 0;
}

struct EvalArgs {
  std::vector<std::string> matches;
  std::vector<std::string> homographies;
  std::string thresholds = "1:10";
  std::string out;
};

int run_eval(const EvalArgs& args) {
  if (args.matches.size() != args.homographies.size()) {
    throw sncnet::DataError("need one homography per match file");
  }
  const std::vector<double> thresholds =
      sncnet::parse_threshold_spec(args.thresholds);

  std::vector<sncnet::MmaPair> pairs;
  pairs.reserve(args.matches.size());
  for (std::size_t p = 0; p < args.matches.size(); ++p) {
    pairs.push_back({std::filesystem::path(args.matches[p]).stem().string(),
                     sncnet::read_matches_csv(args.matches[p]),
                     sncnet::Homography::load(args.homographies[p])});
  }

  const std::vector<sncnet::MmaRow> rows =
      sncnet::mma_sweep_report(pairs, thresholds);
  const std::string csv = sncnet::mma_rows_to_csv(rows);
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw sncnet::IoError("cannot open output: " + args.out);
    out << csv;
  }
  return 0;
}

struct BenchArgs {
  int a_h = 100;
  int a_w = 75;
  int b_h = 100;
  int b_w = 75;
  int k = 10;
  std::uint64_t sites = 0; // 0 means both top-k passes full: 2 * a_h * a_w * k
};

int run_bench(const BenchArgs& args) {
  const sncnet::Dims4 dims{args.a_h, args.a_w, args.b_h, args.b_w};
  const std::uint64_t sites =
      args.sites != 0
          ? args.sites
          : 2ull * std::uint64_t(args.a_h) * std::uint64_t(args.a_w) * args.k;
  const std::uint64_t dense = sncnet::dense_equivalent_bytes(dims);
  const std::uint64_t sparse = sncnet::sparse_storage_bytes(sites, 1);
  const std::uint64_t aligned = sncnet::sparse_storage_bytes_aligned(sites, 1);

  const auto mib = [](std::uint64_t bytes) {
    return double(bytes) / (1024.0 * 1024.0);
  };
  std::printf("dims=%dx%dx%dx%d\n", args.a_h, args.a_w, args.b_h, args.b_w);
  std::printf("sites=%llu\n", static_cast<unsigned long long>(sites));
  std::printf("dense_bytes=%llu\n", static_cast<unsigned long long>(dense));
  std::printf("dense_mib=%.2f\n", mib(dense));
  std::printf("sparse_bytes=%llu\n", static_cast<unsigned long long>(sparse));
  std::printf("sparse_mib=%.2f\n", mib(sparse));
  std::printf("sparse_bytes_aligned=%llu\n",
              static_cast<unsigned long long>(aligned));
  std::printf("sparse_mib_aligned=%.2f\n", mib(aligned));
  std::printf("ratio=%.2f\n", double(dense) / double(sparse));
  std::printf("ratio_aligned=%.2f\n", double(dense) / double(aligned));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse wide-baseline feature matching"};
  app.require_subcommand(1);

  ExtractArgs extract_args;
  CLI::App* extract =
      app.add_subcommand("extract", "Turn an image into a descriptor grid");
  extract->add_option("image", extract_args.image, "PGM/PPM image (P2/P3/P5/P6)")
      ->required();
  extract->add_option("-o,--out", extract_args.out, "Feature map output path")
      ->required();
  extract->add_option("--patch", extract_args.patch, "Patch side in pixels")
      ->capture_default_str();
  extract->add_option("--stride", extract_args.stride, "Patch stride in pixels")
      ->capture_default_str();

  MatchArgs match_args;
  CLI::App* match =
      app.add_subcommand("match", "Match two feature maps and write a CSV");
  match->add_option("map_a", match_args.map_a, "First feature map")->required();
  match->add_option("map_b", match_args.map_b, "Second feature map")->required();
  match->add_option("-o,--out", match_args.out, "Match CSV output path")
      ->required();
  match->add_option("--weights", match_args.weights,
                    "Filter network weights (default: seeded init)");
  match->add_option("--seed", match_args.seed,
                    "Seed for the default network init")
      ->capture_default_str();
  match->add_option("--hidden", match_args.hidden,
                    "Hidden channels for the default network init")
      ->capture_default_str();
  match->add_option("--k", match_args.k, "Neighbours kept per cell")
      ->capture_default_str();
  match->add_flag("--one-way", match_args.one_way,
                  "Correlate A against B only (skip the reverse pass)");
  match->add_option("--reloc", match_args.reloc,
                    "Match relocalisation: none, hard or hard+soft")
      ->check(CLI::IsMember({"none", "hard", "hard+soft"}))
      ->capture_default_str();
  match->add_option("--top-n", match_args.top_n, "Matches kept after ranking")
      ->capture_default_str();
  match->add_option("--temperature", match_args.temperature,
                    "Softargmax sharpness")
      ->capture_default_str();
  match->add_flag("--temperature-divides", match_args.temperature_divides,
                  "Use exponent score/t instead of score*t");
  match->add_option("--threads", match_args.threads,
                    "Worker thread cap, 0 = machine default")
      ->envname("SNC_THREADS")
      ->capture_default_str();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval-mma", "Mean matching accuracy of match CSVs under homographies");
  eval->add_option("--matches", eval_args.matches, "Match CSV paths")
      ->required();
  eval->add_option("--homography", eval_args.homographies,
                   "Homography file per match CSV (9 numbers, row-major)")
      ->required();
  eval->add_option("--thresholds", eval_args.thresholds,
                   "Pixel thresholds, e.g. 1:10 or 0.5,1,2")
      ->capture_default_str();
  eval->add_option("-o,--out", eval_args.out,
                   "Report CSV path (default: stdout)");

  std::uint32_t selfcheck_seed = 1;
  CLI::App* selfcheck = app.add_subcommand(
      "selfcheck", "Cross-check fast kernels against reference code");
  selfcheck->add_option("--seed", selfcheck_seed, "Randomization seed")
      ->capture_default_str();

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand(
      "bench", "Storage arithmetic for a correlation tensor shape");
  bench->add_option("--ha", bench_args.a_h, "Grid height, image A")
      ->capture_default_str();
  bench->add_option("--wa", bench_args.a_w, "Grid width, image A")
      ->capture_default_str();
  bench->add_option("--hb", bench_args.b_h, "Grid height, image B")
      ->capture_default_str();
  bench->add_option("--wb", bench_args.b_w, "Grid width, image B")
      ->capture_default_str();
  bench->add_option("--k", bench_args.k, "Neighbours kept per cell")
      ->capture_default_str();
  bench->add_option("--sites", bench_args.sites,
                    "Active sites (default: both top-k passes full)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) return run_extract(extract_args);
    if (match->parsed()) return run_match(match_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (selfcheck->parsed()) {
      const int failures = sncnet::reference::run_selfcheck(selfcheck_seed,
                                                            std::cout);
      std::cout << "selfcheck: " << failures << " failure(s)\n";
      return failures == 0 ? 0 : 1;
    }
    if (bench->parsed()) return run_bench(bench_args);
  } catch (const sncnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
