#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cotnet::intent {

// Sentence → dense vector. Implementations must return unit-normalized
// vectors of a fixed dimension per instance.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<double>> embed_batch(
      const std::vector<std::string>& texts) = 0;
  std::vector<double> embed(const std::string& text);
};

// Deterministic offline default: lowercase, split on non-alphanumerics, hash
// each token with FNV-1a 64 into dim buckets, sign from the hash's bit
// parity (popcount mod 2), then L2-normalize. No model weights, no locale
// dependence.
class HashedBowEmbedder final : public Embedder {
 public:
  explicit HashedBowEmbedder(int dim = 256) : dim_(dim) {}
  std::vector<std::vector<double>> embed_batch(
      const std::vector<std::string>& texts) override;
  int dim() const { return dim_; }

 private:
  int dim_;
};

std::uint64_t fnv1a64(const std::string& s);

struct HttpEmbedderConfig {
  std::string base_url;    // e.g. http://localhost:8080
  std::string api_key;
  std::string model = "text-embedding-3-small";
  int timeout_s = 60;
  int batch_size = 64;     // inputs per request
  int max_in_flight = 4;   // concurrent requests
};

// Adapter for an OpenAI-compatible embeddings endpoint:
//   POST {base_url}/v1/embeddings  body {model, input[]}
//   response {data: [{embedding: [...]}, ...]}
// Vectors are re-normalized on receipt.
class HttpEmbedder final : public Embedder {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig cfg) : cfg_(std::move(cfg)) {}
  std::vector<std::vector<double>> embed_batch(
      const std::vector<std::string>& texts) override;

 private:
  HttpEmbedderConfig cfg_;
};

}  // namespace cotnet::intent
