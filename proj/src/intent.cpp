#include "cotnet/intent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <regex>

#include "cotnet/errors.hpp"
#include "cotnet/splitmix64.hpp"

namespace cotnet::intent {

std::string to_string(Objective o) {
  switch (o) {
    case Objective::coverage: return "coverage";
    case Objective::sum_rate: return "sum_rate";
    case Objective::energy: return "energy";
    case Objective::latency: return "latency";
  }
  return "unknown";
}

IntentEmbedding embed_intent(const IntentText& text, Embedder& embedder) {
  IntentEmbedding e;
  e.vector = embedder.embed(text.text);
  e.dim = static_cast<int>(e.vector.size());
  return e;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

int nearest_centroid(const std::vector<double>& v,
                     const std::vector<std::vector<double>>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(v, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

IntentCluster cluster_intents(std::span<const IntentEmbedding> embeddings,
                              int k, std::uint64_t seed, int max_iters) {
  const std::size_t n = embeddings.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw DomainError("cluster count must satisfy 1 <= k <= n");
  for (const auto& e : embeddings)
    if (e.vector.size() != embeddings.front().vector.size())
      throw DomainError("embedding dimensions differ");

  // All seeded draws and accumulations run over this content-sorted order,
  // which is what makes the result invariant under input permutation.
  std::vector<std::size_t> canon(n);
  std::iota(canon.begin(), canon.end(), std::size_t{0});
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(
        embeddings[a].vector.begin(), embeddings[a].vector.end(),
        embeddings[b].vector.begin(), embeddings[b].vector.end());
  });

  Splitmix64 rng(seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  centroids.push_back(
      embeddings[canon[rng.uniform_int(static_cast<std::uint32_t>(n))]].vector);

  std::vector<double> d2(n);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t ci = 0; ci < n; ++ci) {
      const auto& v = embeddings[canon[ci]].vector;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(v, c));
      d2[ci] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total <= 0.0) {
      pick = rng.uniform_int(static_cast<std::uint32_t>(n));
    } else {
      const double r = rng.uniform01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t ci = 0; ci < n; ++ci) {
        acc += d2[ci];
        if (acc > r) {
          pick = ci;
          break;
        }
      }
    }
    centroids.push_back(embeddings[canon[pick]].vector);
  }

  std::vector<int> canon_assign(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t ci = 0; ci < n; ++ci) {
      const int a = nearest_centroid(embeddings[canon[ci]].vector, centroids);
      if (a != canon_assign[ci]) {
        canon_assign[ci] = a;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    const std::size_t dim = embeddings.front().vector.size();
    std::vector<std::vector<double>> sums(
        static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t ci = 0; ci < n; ++ci) {
      const auto& v = embeddings[canon[ci]].vector;
      auto& s = sums[static_cast<std::size_t>(canon_assign[ci])];
      for (std::size_t j = 0; j < dim; ++j) s[j] += v[j];
      ++counts[static_cast<std::size_t>(canon_assign[ci])];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      centroids[c] = sums[c];
      for (double& x : centroids[c]) x /= static_cast<double>(counts[c]);
    }
  }

  // Present centroids in lexicographic order so equal inputs always yield
  // identically labelled output.
  std::vector<std::size_t> order(centroids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(centroids[a].begin(),
                                        centroids[a].end(),
                                        centroids[b].begin(),
                                        centroids[b].end());
  });
  std::vector<int> relabel(centroids.size());
  std::vector<std::vector<double>> sorted;
  sorted.reserve(centroids.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    relabel[order[pos]] = static_cast<int>(pos);
    sorted.push_back(centroids[order[pos]]);
  }

  IntentCluster out;
  out.k = k;
  out.centroids = std::move(sorted);
  out.assignments.resize(n);
  out.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = nearest_centroid(embeddings[i].vector, out.centroids);
    out.assignments[i] = a;
    out.sse += sq_dist(embeddings[i].vector,
                       out.centroids[static_cast<std::size_t>(a)]);
  }
  return out;
}

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  return out;
}

bool contains_re(const std::string& text, const char* pattern) {
  return std::regex_search(text, std::regex(pattern));
}

bool capture_number(const std::string& text, const char* pattern,
                    double* value) {
  std::smatch m;
  if (!std::regex_search(text, m, std::regex(pattern))) return false;
  *value = std::strtod(m[1].str().c_str(), nullptr);
  return true;
}

}  // namespace

ParsedIntent parse_intent(const IntentText& text, int cluster) {
  ParsedIntent out;
  out.raw = text;
  out.category = cluster;

  const std::string t = ascii_lower(text.text);
  if (contains_re(t, "\\bcoverage\\b"))
    out.objectives.insert(Objective::coverage);
  if (contains_re(t, "\\b(data rates?|rates?|throughput)\\b"))
    out.objectives.insert(Objective::sum_rate);
  if (contains_re(t, "\\benergy\\b|\\bpower consumption\\b"))
    out.objectives.insert(Objective::energy);
  if (contains_re(t, "\\blatency\\b|\\bdelay\\b"))
    out.objectives.insert(Objective::latency);
  if (out.objectives.empty())
    throw UnrecognizedIntent("no objective keyword in: " + text.text);

  const char* num = "([0-9]+(?:\\.[0-9]+)?)";
  double v = 0.0;
  if (capture_number(t, (std::string("at least ") + num +
                         "\\s*%\\s*coverage").c_str(), &v))
    out.constraints["min_coverage"] = v / 100.0;
  if (capture_number(t, (std::string("at least ") + num +
                         "\\s*mbps").c_str(), &v))
    out.constraints["min_rate_mbps"] = v;
  if (capture_number(t, (std::string("(?:at most|below) ") + num +
                         "\\s*dbm").c_str(), &v))
    out.constraints["max_power_dbm"] = v;
  if (capture_number(t, (std::string("(?:below|within) ") + num +
                         "\\s*ms\\b").c_str(), &v))
    out.constraints["max_latency_ms"] = v;
  return out;
}

}  // namespace cotnet::intent
