#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cotnet/cot.hpp"
#include "cotnet/embedder.hpp"
#include "cotnet/intent.hpp"
#include "cotnet/scenario.hpp"

namespace cotnet::cot {

// Reasoning provider. The scenario rides along so offline backends can run
// the physics and optimizer themselves instead of hallucinating numbers.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual ReasoningTrace invoke(const PromptBundle& prompt,
                                const netsim::NetworkScenario& scenario) = 0;
  virtual std::string id() const = 0;
};

// Offline CoT backend. Reads the stage names in the task instruction to pick
// its mode, solves the instance with the deployment optimizer, and emits a
// stepwise trace whose numeric claims all come from the physics engine:
//   placement search  -> best coarse-grid cell at max power
//   power tuning      -> area-center position, best power level
//   solving           -> full two-phase optimization of position and power
//   zero-shot trigger -> same as solving (used for exemplar generation)
//   anything else     -> user-centroid placement at max power
class MockCotBackend final : public LlmBackend {
 public:
  ReasoningTrace invoke(const PromptBundle& prompt,
                        const netsim::NetworkScenario& scenario) override;
  std::string id() const override { return "mock-cot"; }
};

// Offline non-CoT baseline: no reasoning steps, area-center position at max
// power.
class MockNonCotBackend final : public LlmBackend {
 public:
  ReasoningTrace invoke(const PromptBundle& prompt,
                        const netsim::NetworkScenario& scenario) override;
  std::string id() const override { return "mock-non-cot"; }
};

struct HttpChatConfig {
  std::string base_url;  // e.g. https://api.openai.com
  std::string api_key;
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int timeout_s = 60;
  int max_attempts = 3;  // connection-level and 5xx retries
};

// Adapter for an OpenAI-compatible chat endpoint:
//   POST {base_url}/v1/chat/completions
//   body {model, messages:[{role,content}], temperature}
// The reply's prose is split into steps and its ```strategy fence becomes
// the final block.
class HttpChatBackend final : public LlmBackend {
 public:
  explicit HttpChatBackend(HttpChatConfig cfg) : cfg_(std::move(cfg)) {}
  ReasoningTrace invoke(const PromptBundle& prompt,
                        const netsim::NetworkScenario& scenario) override;
  std::string id() const override { return "http:" + cfg_.model; }

 private:
  HttpChatConfig cfg_;
};

// Invokes and stamps wall-clock latency onto the trace.
ReasoningTrace invoke_backend(LlmBackend& backend, const PromptBundle& prompt,
                              const netsim::NetworkScenario& scenario);

// Auto-CoT exemplar construction: embed the questions, k-means them, take the
// question nearest each centroid, and have the backend reason about it with
// the zero-shot trigger. Empty clusters are skipped with a stderr warning.
std::vector<ExemplarRecord> build_auto_cot_exemplars(
    const std::vector<intent::IntentText>& questions, int k,
    LlmBackend& backend, intent::Embedder& embedder,
    const netsim::NetworkScenario& scenario, std::uint64_t seed = 0);

}  // namespace cotnet::cot
