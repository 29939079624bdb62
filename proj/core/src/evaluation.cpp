#include "sncnet/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sncnet {

namespace {

double det3(const std::array<double, 9>& h) {
  return h[0] * (h[4] * h[8] - h[5] * h[7]) -
         h[1] * (h[3] * h[8] - h[5] * h[6]) +
         h[2] * (h[3] * h[7] - h[4] * h[6]);
}

} // namespace

Homography Homography::from_matrix(const std::array<double, 9>& h) {
  for (double v : h) {
    if (!std::isfinite(v)) {
      throw DataError("homography entries must be finite");
    }
  }
  if (std::abs(det3(h)) <= 1e-12) {
    throw DataError("homography is singular or nearly singular");
  }
  std::array<double, 9> n = h;
  if (n[8] != 0.0) {
    for (double& v : n) v /= h[8];
  }
  return Homography(n);
}

Homography Homography::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open homography file: " + path);
  }
  std::array<double, 9> h{};
  for (double& v : h) {
    if (!(in >> v)) {
      throw FormatError("homography file needs 9 numbers: " + path);
    }
  }
  return from_matrix(h);
}

Homography Homography::inverse() const {
  const std::array<double, 9>& h = h_;
  const double d = det3(h);
  // The constructor guarantees |det| > 1e-12 for the unnormalised input, but
  // normalisation rescales it, so check again.
  if (std::abs(d) <= 1e-12) {
    throw DataError("homography inverse: determinant too small");
  }
  std::array<double, 9> inv = {
      (h[4] * h[8] - h[5] * h[7]) / d, (h[2] * h[7] - h[1] * h[8]) / d,
      (h[1] * h[5] - h[2] * h[4]) / d, (h[5] * h[6] - h[3] * h[8]) / d,
      (h[0] * h[8] - h[2] * h[6]) / d, (h[2] * h[3] - h[0] * h[5]) / d,
      (h[3] * h[7] - h[4] * h[6]) / d, (h[1] * h[6] - h[0] * h[7]) / d,
      (h[0] * h[4] - h[1] * h[3]) / d};
  return from_matrix(inv);
}

PixelPoint Homography::warp(const PixelPoint& p) const {
  const double w = h_[6] * p.x + h_[7] * p.y + h_[8];
  if (std::abs(w) <= 1e-12) {
    throw DataError("homography warp: point maps to infinity");
  }
  return {(h_[0] * p.x + h_[1] * p.y + h_[2]) / w,
          (h_[3] * p.x + h_[4] * p.y + h_[5]) / w};
}

double mma(std::span<const PixelCorrespondence> ms, const Homography& h,
           double threshold) {
  if (ms.empty()) {
    throw DataError("match accuracy needs at least one correspondence");
  }
  if (!(threshold > 0.0)) {
    throw DataError("match accuracy threshold must be positive");
  }
  std::size_t correct = 0;
  for (const PixelCorrespondence& m : ms) {
    const PixelPoint w = h.warp(m.a);
    const double dx = w.x - m.b.x;
    const double dy = w.y - m.b.y;
    if (std::sqrt(dx * dx + dy * dy) < threshold) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ms.size());
}

std::vector<double> mma_sweep(std::span<const PixelCorrespondence> ms,
                              const Homography& h,
                              std::span<const double> thresholds) {
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    out.push_back(mma(ms, h, t));
  }
  return out;
}

std::vector<MmaRow> mma_sweep_report(std::span<const MmaPair> pairs,
                                     std::span<const double> thresholds) {
  if (pairs.empty()) {
    throw DataError("accuracy report needs at least one pair");
  }
  std::vector<MmaRow> rows;
  rows.reserve((pairs.size() + 1) * thresholds.size());
  std::vector<double> sums(thresholds.size(), 0.0);
  std::size_t total_matches = 0;
  for (const MmaPair& p : pairs) {
    const std::vector<double> accs = mma_sweep(p.matches, p.homography,
                                               thresholds);
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      rows.push_back({p.id, thresholds[ti], accs[ti], p.matches.size()});
      sums[ti] += accs[ti];
    }
    total_matches += p.matches.size();
  }
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    rows.push_back({"mean", thresholds[ti],
                    sums[ti] / static_cast<double>(pairs.size()),
                    total_matches});
  }
  return rows;
}

std::string mma_rows_to_csv(std::span<const MmaRow> rows) {
  std::string out = "pair_id,threshold,accuracy,match_count\n";
  char buf[160];
  for (const MmaRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%zu\n", r.pair_id.c_str(),
                  r.threshold, r.accuracy, r.match_count);
    out += buf;
  }
  return out;
}

std::vector<double> parse_threshold_spec(const std::string& spec) {
  std::vector<double> out;
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    std::size_t lo_end = 0;
    std::size_t hi_end = 0;
    long lo = 0;
    long hi = 0;
    try {
      lo = std::stol(spec.substr(0, colon), &lo_end);
      hi = std::stol(spec.substr(colon + 1), &hi_end);
    } catch (const std::exception&) {
      throw DataError("bad threshold range: " + spec);
    }
    if (lo_end != colon || hi_end != spec.size() - colon - 1 || lo > hi) {
      throw DataError("bad threshold range: " + spec);
    }
    for (long v = lo; v <= hi; ++v) {
      out.push_back(static_cast<double>(v));
    }
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t end = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &end);
      } catch (const std::exception&) {
        throw DataError("bad threshold value: " + item);
      }
      if (end != item.size()) {
        throw DataError("bad threshold value: " + item);
      }
      out.push_back(v);
    }
  }
  if (out.empty()) {
    throw DataError("threshold spec is empty: " + spec);
  }
  for (double v : out) {
    if (!(v > 0.0)) {
      throw DataError("thresholds must be positive");
    }
  }
  return out;
}

std::vector<PixelCorrespondence> read_matches_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open match file: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("match file is empty: " + path);
  }
  if (line != "xA,yA,xB,yB,score") {
    throw FormatError("unexpected match file header: " + line);
  }
  std::vector<PixelCorrespondence> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double v[5];
    std::stringstream ss(line);
    std::string item;
    int field = 0;
    while (std::getline(ss, item, ',')) {
      if (field >= 5) break;
      try {
        std::size_t end = 0;
        v[field] = std::stod(item, &end);
        if (end != item.size()) throw DataError("");
      } catch (const std::exception&) {
        throw FormatError("bad number in match file line " +
                          std::to_string(lineno));
      }
      ++field;
    }
    if (field != 5) {
      throw FormatError("match file line " + std::to_string(lineno) +
                        " needs 5 fields");
    }
    out.push_back({{v[0], v[1]}, {v[2], v[3]}});
  }
  return out;
}

} // namespace sncnet
