#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cotnet/activation.hpp"
#include "cotnet/backend.hpp"
#include "cotnet/cot.hpp"
#include "cotnet/intent.hpp"
#include "cotnet/optimizer.hpp"
#include "cotnet/scenario.hpp"
#include "cotnet/scoring.hpp"

namespace cotnet::harness {

enum class PipelineKind { cot, non_cot };
std::string to_string(PipelineKind k);
PipelineKind pipeline_from_string(const std::string& s);  // accepts non-cot

enum class BackendKind { mock, http };
std::string to_string(BackendKind k);
BackendKind backend_from_string(const std::string& s);

// Scenario template expanded per (seed, range) cell: users are drawn fresh,
// the single UAV slot starts at the area center at max power.
struct ScenarioTemplate {
  netsim::AreaSize area_m;
  int user_count = 10;
  double altitude_m = 100.0;
  double max_tx_power_dbm = 20.0;
  netsim::ChannelParams channel;
};

struct HttpEndpoints {
  std::string llm_base;    // LLM_API_BASE
  std::string llm_key;     // LLM_API_KEY
  std::string embed_base;  // EMBED_API_BASE
  std::string embed_key;   // EMBED_API_KEY
};

struct ExperimentConfig {
  ScenarioTemplate scenario;
  std::vector<double> range_sweep = {200, 250, 300, 350, 400, 450, 500, 550};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  PipelineKind pipeline = PipelineKind::cot;
  BackendKind backend = BackendKind::mock;
  scoring::UtilityWeights weights;
  opt::OptimizerConfig optimizer;
  activation::TrainParams activation;
  std::string intent_text =
      "Deploy a UAV base station that maximizes both coverage and user data "
      "rates.";
  std::string policy_path;     // optional trained activation policy
  std::string exemplars_path;  // optional exemplar store
  double exemplar_min_q_total = 0.8;  // feedback-loop admission threshold
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& c);  // throws ConfigError
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

// FNV-1a over the canonical (sorted-key) JSON dump, so the hash is stable
// under field reordering in the config file.
std::uint64_t config_hash(const ExperimentConfig& c);
std::string config_hash_hex(const ExperimentConfig& c);

struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  double range_m = 0.0;
  std::string pipeline;
  std::string backend_id;
  scoring::UtilityReport utility;
  double coverage_ratio = 0.0;
  double sum_rate_bps = 0.0;
  int covered_users = 0;
  cot::ControlCommand command;
  int trace_steps = 0;
  std::string error;  // extraction failure note; empty on clean runs
  double wall_clock_ms = 0.0;
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);
// Field-wise equality ignoring wall_clock_ms.
bool records_equivalent(const RunRecord& a, const RunRecord& b);
void write_run_records(const std::vector<RunRecord>& records,
                       const std::string& path);

struct SweepRow {
  double range_m = 0.0;
  std::string pipeline;
  double mean_coverage = 0.0;
  double mean_sum_rate_bps = 0.0;
  double mean_q_total = 0.0;
  double std_coverage = 0.0;
  double std_sum_rate_bps = 0.0;
  double std_q_total = 0.0;
  int n = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (range_m, pipeline)
};

// Header: range_m,pipeline,mean_coverage,mean_sum_rate_bps,mean_q_total,
// std_coverage,std_sum_rate_bps,std_q_total,n. Numbers printed with %.9g so
// equal configs yield byte-identical files.
std::string sweep_to_csv(const SweepResult& result);
void write_sweep_csv(const SweepResult& result, const std::string& path);
SweepResult sweep_from_csv(const std::string& path);
// Line chart with one polyline per (pipeline, metric) series and embedded
// value labels.
void write_sweep_svg(const SweepResult& result, const std::string& path);

// The shipped intent corpus: the case-study request (id 0) plus a spread of
// performance, energy, latency and security intents. The two security
// intents carry no recognizable objective and exercise the parse-failure
// path.
std::vector<intent::IntentText> builtin_intent_corpus();

// Embeds and clusters the corpus once, then assigns new intents to the
// nearest centroid.
class IntentCatalog {
 public:
  IntentCatalog(const std::vector<intent::IntentText>& corpus,
                intent::Embedder& embedder, int k, std::uint64_t seed);
  int assign(const std::string& text, intent::Embedder& embedder) const;
  const intent::IntentCluster& clusters() const { return clusters_; }

 private:
  intent::IntentCluster clusters_;
};

// End-to-end decision layer: parse/cluster the intent, pick a module, prompt
// a backend, extract and execute the command, score the episode.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig cfg);

  // module_override >= 0 forces the module (used by activation training);
  // cell_stream seeds the per-cell PRNG stream for epsilon draws.
  RunRecord run_single(std::uint64_t seed, double range_m, PipelineKind kind,
                       int module_override = -1,
                       std::uint64_t cell_stream = 0);

  // Cartesian product of range_sweep x seeds x both pipelines; cells may run
  // in parallel, aggregation is index-ordered and deterministic.
  SweepResult run_sweep(std::vector<RunRecord>* records = nullptr);

  netsim::NetworkScenario build_scenario(std::uint64_t seed,
                                         double range_m) const;
  int assign_cluster(const std::string& text);
  const std::vector<cot::CotModuleSpec>& modules() const { return modules_; }
  const ExperimentConfig& config() const { return cfg_; }
  int intent_cluster() const { return intent_cluster_; }

 private:
  cot::LlmBackend& backend_for(PipelineKind kind);
  int choose_module(int cluster, double range_m,
                    const std::set<intent::Objective>& objectives,
                    std::uint64_t cell_stream);

  intent::Embedder& embedder();

  ExperimentConfig cfg_;
  std::string hash_hex_;
  intent::HashedBowEmbedder embedder_;
  std::unique_ptr<intent::HttpEmbedder> http_embedder_;
  std::unique_ptr<IntentCatalog> catalog_;
  std::vector<cot::CotModuleSpec> modules_;
  std::optional<activation::ActivationPolicy> policy_;
  std::unique_ptr<cot::LlmBackend> mock_cot_;
  std::unique_ptr<cot::LlmBackend> mock_non_cot_;
  std::unique_ptr<cot::LlmBackend> http_;
  intent::ParsedIntent parsed_;
  int intent_cluster_ = 0;
};

// Episodes draw a parseable corpus intent plus a (seed, range) cell and pay
// the executed command's Q_total as reward.
class PipelineEpisodeOracle : public activation::EpisodeOracle {
 public:
  PipelineEpisodeOracle(Pipeline& pipeline, std::uint64_t env_seed);
  int n_actions() const override;
  activation::ActivationState sample_state() override;
  double reward(const activation::ActivationState& state, int action) override;

 private:
  Pipeline& pipeline_;
  Splitmix64 rng_;
  std::vector<intent::IntentText> parseable_;
  std::vector<int> clusters_;
  std::uint64_t episode_seed_ = 0;
  double episode_range_ = 400.0;
};

struct TrainOutcome {
  activation::ActivationPolicy policy;
  std::vector<int> greedy_per_cluster;  // greedy action for each cluster id
};

TrainOutcome train_activation_pipeline(Pipeline& pipeline);

// Mean episode reward of the trained greedy policy vs a uniform-random
// policy over identical episode streams.
std::pair<double, double> compare_policies(
    Pipeline& pipeline, const activation::ActivationPolicy& trained,
    int episodes, std::uint64_t eval_seed);

// Exemplar persistence plus the execution-feedback loop: episodes scoring at
// or above min_q_total are appended as fresh exemplars.
struct ExemplarStore {
  std::vector<cot::ExemplarRecord> records;

  static ExemplarStore load(const std::string& path);
  void save(const std::string& path) const;
  std::vector<cot::ExemplarRecord> for_tag(cot::TaskTag tag) const;
  bool maybe_add(const std::string& question, const cot::ReasoningTrace& trace,
                 cot::TaskTag tag, double q_total, double min_q_total);
};

HttpEndpoints endpoints_from_env();

}  // namespace cotnet::harness
