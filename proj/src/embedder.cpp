#include "cotnet/embedder.hpp"

#include <bit>
#include <cmath>
#include <future>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotnet/errors.hpp"

namespace cotnet::intent {

std::vector<double> Embedder::embed(const std::string& text) {
  return embed_batch({text}).front();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

namespace {

// ASCII-only fold and token split so vectors never depend on the ambient
// locale. Bytes outside [A-Za-z0-9] (including UTF-8 continuation bytes)
// act as separators.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    const bool alnum = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    if (alnum) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

void l2_normalize(std::vector<double>& v) {
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 <= 0.0) throw DomainError("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
}

}  // namespace

std::vector<std::vector<double>> HashedBowEmbedder::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    const auto tokens = tokenize(text);
    if (tokens.empty())
      throw DomainError("intent text has no alphanumeric tokens");
    std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
    for (const auto& tok : tokens) {
      const std::uint64_t h = fnv1a64(tok);
      const auto bucket = static_cast<std::size_t>(
          h % static_cast<std::uint64_t>(dim_));
      const double sign = (std::popcount(h) % 2 == 0) ? 1.0 : -1.0;
      v[bucket] += sign;
    }
    l2_normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

std::vector<std::vector<double>> post_embedding_request(
    const HttpEmbedderConfig& cfg, const std::vector<std::string>& inputs) {
  const int max_attempts = 3;
  for (int attempt = 1;; ++attempt) {
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(cfg.timeout_s, 0);
    client.set_read_timeout(cfg.timeout_s, 0);
    httplib::Headers headers;
    if (!cfg.api_key.empty())
      headers.emplace("Authorization", "Bearer " + cfg.api_key);

    nlohmann::json body{{"model", cfg.model}, {"input", inputs}};
    auto res = client.Post("/v1/embeddings", headers, body.dump(),
                           "application/json");
    if (!res) {
      if (attempt < max_attempts) continue;
      if (res.error() == httplib::Error::ConnectionTimeout ||
          res.error() == httplib::Error::Read)
        throw TimeoutError("embedding endpoint timed out", attempt);
      throw TransportError("embedding endpoint unreachable: " +
                               httplib::to_string(res.error()),
                           0, attempt);
    }
    if (res->status >= 500 && attempt < max_attempts) continue;
    if (res->status != 200)
      throw TransportError("embedding endpoint returned HTTP " +
                               std::to_string(res->status),
                           res->status, attempt);

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedReply(std::string("embedding reply is not JSON: ") +
                           e.what());
    }
    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != inputs.size())
      throw MalformedReply("embedding reply lacks a data[] entry per input");

    std::vector<std::vector<double>> vecs(inputs.size());
    for (std::size_t i = 0; i < reply["data"].size(); ++i) {
      const auto& item = reply["data"][i];
      const std::size_t idx =
          item.contains("index") ? item["index"].get<std::size_t>() : i;
      if (idx >= vecs.size() || !item.contains("embedding"))
        throw MalformedReply("embedding reply item is malformed");
      vecs[idx] = item["embedding"].get<std::vector<double>>();
    }
    for (auto& v : vecs) l2_normalize(v);
    return vecs;
  }
}

}  // namespace

std::vector<std::vector<double>> HttpEmbedder::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out(texts.size());

  std::vector<std::pair<std::size_t, std::vector<std::string>>> chunks;
  for (std::size_t start = 0; start < texts.size();
       start += static_cast<std::size_t>(cfg_.batch_size)) {
    const std::size_t end = std::min(
        texts.size(), start + static_cast<std::size_t>(cfg_.batch_size));
    chunks.emplace_back(
        start, std::vector<std::string>(texts.begin() + start,
                                        texts.begin() + end));
  }

  // Bounded fan-out: at most max_in_flight requests at once.
  for (std::size_t base = 0; base < chunks.size();
       base += static_cast<std::size_t>(cfg_.max_in_flight)) {
    const std::size_t stop = std::min(
        chunks.size(), base + static_cast<std::size_t>(cfg_.max_in_flight));
    std::vector<std::future<std::vector<std::vector<double>>>> futures;
    for (std::size_t c = base; c < stop; ++c) {
      futures.push_back(std::async(std::launch::async, [this, c, &chunks] {
        return post_embedding_request(cfg_, chunks[c].second);
      }));
    }
    for (std::size_t c = base; c < stop; ++c) {
      auto vecs = futures[c - base].get();
      for (std::size_t i = 0; i < vecs.size(); ++i)
        out[chunks[c].first + i] = std::move(vecs[i]);
    }
  }
  return out;
}

}  // namespace cotnet::intent
