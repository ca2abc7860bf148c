#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cotnet/embedder.hpp"

namespace cotnet::intent {

struct IntentText {
  int id = 0;
  std::string text;
};

struct IntentEmbedding {
  std::vector<double> vector;
  int dim = 0;
};

struct IntentCluster {
  std::vector<int> assignments;               // one entry per input embedding
  std::vector<std::vector<double>> centroids; // k centroids
  int k = 0;
  double sse = 0.0;                           // sum of squared distances
};

enum class Objective { coverage, sum_rate, energy, latency };

std::string to_string(Objective o);

struct ParsedIntent {
  std::set<Objective> objectives;
  std::map<std::string, double> constraints;  // e.g. min_coverage, max_power_dbm
  int category = 0;                           // cluster index
  IntentText raw;
};

// Embeds and unit-normalizes; throws DomainError on an empty token stream
// (default embedder) and TransportError on endpoint failure (HTTP embedder).
IntentEmbedding embed_intent(const IntentText& text, Embedder& embedder);

// Seeded k-means++ followed by Lloyd iterations until assignments are stable
// or max_iters. All random draws and floating-point accumulations run over a
// canonical ordering of the inputs (lexicographic by vector content), so the
// clustering is invariant under input permutation.
IntentCluster cluster_intents(std::span<const IntentEmbedding> embeddings,
                              int k, std::uint64_t seed, int max_iters);

// Nearest-centroid assignment for a single embedding (lowest index on ties).
int nearest_centroid(const std::vector<double>& v,
                     const std::vector<std::vector<double>>& centroids);

// Keyword-rule parse; throws UnrecognizedIntent when no objective keyword
// matches (never guesses). Recognized constraint phrases:
//   "at least 35% coverage"            -> min_coverage (fraction)
//   "at least 50 Mbps"                 -> min_rate_mbps
//   "at most 15 dBm" / "below 15 dBm"  -> max_power_dbm
//   "below 20 ms" / "within 20 ms"     -> max_latency_ms
ParsedIntent parse_intent(const IntentText& text, int cluster);

}  // namespace cotnet::intent
