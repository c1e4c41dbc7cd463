#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hammerpuf/errors.hpp"
#include "hammerpuf/measurement.hpp"

namespace hammerpuf {

/// Sorted indices of the cells whose readout differs from the initial value.
struct FlipSet {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::string source_id;               // "<device_id>#<measurement_seed>"

  std::size_t size() const { return indices.size(); }
};

inline FlipSet extract_flip_set(const Measurement& m) {
  FlipSet fs;
  fs.source_id = m.device_id + "#" + std::to_string(m.measurement_seed);
  const std::uint8_t iv = m.config.puf_row_iv;
  for (std::size_t byte = 0; byte < m.readout.size(); ++byte) {
    std::uint8_t diff = m.readout[byte] ^ iv;
    while (diff != 0) {
      const int j = __builtin_clz(static_cast<unsigned>(diff) << 24);
      fs.indices.push_back(static_cast<std::uint32_t>(byte * 8 + j));
      diff &= static_cast<std::uint8_t>(~(0x80u >> j));
    }
  }
  return fs;
}

/// |a intersect b| / |a union b|, with J(empty, empty) = 1 by convention.
inline double jaccard(const FlipSet& a, const FlipSet& b) {
  if (a.indices.empty() && b.indices.empty()) return 1.0;
  std::size_t i = 0, k = 0, both = 0;
  while (i < a.indices.size() && k < b.indices.size()) {
    if (a.indices[i] == b.indices[k]) {
      ++both;
      ++i;
      ++k;
    } else if (a.indices[i] < b.indices[k]) {
      ++i;
    } else {
      ++k;
    }
  }
  const std::size_t unions = a.indices.size() + b.indices.size() - both;
  return static_cast<double>(both) / static_cast<double>(unions);
}

struct JaccardStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::uint64_t count = 0;
  std::vector<double> bin_edges;        // 51 edges over [0, 1]
  std::vector<std::uint64_t> bin_counts;  // 50 uniform bins
};

inline constexpr int kHistogramBins = 50;

inline JaccardStats jaccard_stats(const std::vector<double>& values) {
  JaccardStats s;
  s.bin_edges.resize(kHistogramBins + 1);
  for (int i = 0; i <= kHistogramBins; ++i)
    s.bin_edges[i] = static_cast<double>(i) / kHistogramBins;
  s.bin_counts.assign(kHistogramBins, 0);
  if (values.empty()) return s;
  s.count = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    int bin = static_cast<int>(v * kHistogramBins);
    if (bin >= kHistogramBins) bin = kHistogramBins - 1;  // v == 1.0
    if (bin < 0) bin = 0;
    ++s.bin_counts[static_cast<std::size_t>(bin)];
  }
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

inline void to_json(nlohmann::json& j, const JaccardStats& s) {
  j = nlohmann::json{{"min", s.min},       {"max", s.max},
                     {"mean", s.mean},     {"count", s.count},
                     {"bin_edges", s.bin_edges}, {"bin_counts", s.bin_counts}};
}

/// One scored pair for CSV output.
struct PairRecord {
  std::string id_a;
  std::string id_b;
  double jaccard = 0.0;
  std::string kind;  // "intra" or "inter"
};

inline std::vector<PairRecord> intra_pairs(const std::vector<FlipSet>& sets) {
  std::vector<PairRecord> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t k = i + 1; k < sets.size(); ++k) {
      out.push_back({sets[i].source_id, sets[k].source_id,
                     jaccard(sets[i], sets[k]), "intra"});
    }
  }
  return out;
}

inline std::vector<PairRecord> inter_pairs(
    const std::vector<std::vector<FlipSet>>& groups) {
  std::vector<PairRecord> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t h = g + 1; h < groups.size(); ++h) {
      for (const FlipSet& a : groups[g]) {
        for (const FlipSet& b : groups[h]) {
          out.push_back({a.source_id, b.source_id, jaccard(a, b), "inter"});
        }
      }
    }
  }
  return out;
}

inline std::vector<double> pair_values(const std::vector<PairRecord>& pairs) {
  std::vector<double> v;
  v.reserve(pairs.size());
  for (const PairRecord& p : pairs) v.push_back(p.jaccard);
  return v;
}

/// Robustness statistic: Jaccard over all unordered pairs of measurements
/// of one device under one config.
inline JaccardStats j_intra(const std::vector<Measurement>& measurements) {
  if (measurements.size() < 2)
    throw ConfigError("j_intra needs at least 2 measurements");
  for (const Measurement& m : measurements) {
    if (m.device_id != measurements[0].device_id ||
        !(m.config == measurements[0].config)) {
      throw ConfigError("j_intra: measurements must share device and config");
    }
  }
  std::vector<FlipSet> sets;
  sets.reserve(measurements.size());
  for (const Measurement& m : measurements) sets.push_back(extract_flip_set(m));
  return jaccard_stats(pair_values(intra_pairs(sets)));
}

/// Uniqueness statistic: Jaccard over all cross-device measurement pairs.
inline JaccardStats j_inter(const std::vector<std::vector<Measurement>>& groups) {
  if (groups.size() < 2) throw ConfigError("j_inter needs at least 2 groups");
  std::vector<std::vector<FlipSet>> sets(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const Measurement& m : groups[g]) sets[g].push_back(extract_flip_set(m));
  }
  return jaccard_stats(pair_values(inter_pairs(sets)));
}

/// log2 of C(N, k) via log-gamma; upper bound on flip-location entropy.
inline double entropy_bits(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw ConfigError("entropy_bits: k must be <= N");
  const long double bits =
      (std::lgamma(static_cast<long double>(n) + 1.0L) -
       std::lgamma(static_cast<long double>(k) + 1.0L) -
       std::lgamma(static_cast<long double>(n - k) + 1.0L)) /
      std::log(2.0L);
  return static_cast<double>(bits);
}

/// Entropy per cell: log2 C(N, k) / N.
inline double entropy_fraction(std::uint64_t n, std::uint64_t k) {
  if (n == 0) throw ConfigError("entropy_fraction: N must be > 0");
  return entropy_bits(n, k) / static_cast<double>(n);
}

/// Exact log2 C(N, k) for N <= 64 (binomials fit in 64 bits). Reference
/// path for validating the log-gamma route.
inline double exact_log2_binomial(unsigned n, unsigned k) {
  if (n > 64 || k > n) throw ConfigError("exact_log2_binomial: need k <= n <= 64");
  if (k > n - k) k = n - k;
  unsigned __int128 c = 1;
  for (unsigned i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;  // product of i consecutive integers divides evenly
  }
  return static_cast<double>(
      std::log2(static_cast<long double>(static_cast<std::uint64_t>(c))));
}

/// Bytes of PUF response needed to carry target_key_bits of entropy at the
/// given per-cell fraction.
inline std::uint64_t key_material_size(std::uint64_t target_key_bits,
                                       double fractional_entropy) {
  if (target_key_bits == 0) return 0;
  if (fractional_entropy <= 0)
    throw ConfigError("key_material_size: fractional_entropy must be > 0");
  return static_cast<std::uint64_t>(std::ceil(
      static_cast<double>(target_key_bits) / fractional_entropy / 8.0));
}

}  // namespace hammerpuf
