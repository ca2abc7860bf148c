// Command-line front end: single runs, range sweeps, activation training,
// exemplar store construction, and sweep plotting.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cotnet/backend.hpp"
#include "cotnet/errors.hpp"
#include "cotnet/harness.hpp"
#include "cotnet/physics.hpp"
#include "cotnet/scoring.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cotnet;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> range;
  std::optional<std::string> pipeline;
  std::optional<std::string> backend;
  std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_overrides = true) {
  cmd->add_option("--config", opts.config_path, "Experiment config JSON path");
  if (with_overrides) {
    cmd->add_option("--seed", opts.seed, "Override the seed list with one seed");
    cmd->add_option("--range", opts.range,
                    "Override the range sweep with one range in metres");
    cmd->add_option("--pipeline", opts.pipeline, "Pipeline: cot or non-cot")
        ->check(CLI::IsMember({"cot", "non-cot", "non_cot"}));
    cmd->add_option("--backend", opts.backend, "Backend: mock or http")
        ->check(CLI::IsMember({"mock", "http"}));
  }
  cmd->add_option("--out", opts.out_dir, "Output directory");
}

harness::ExperimentConfig resolve_config(const CommonOpts& opts) {
  harness::ExperimentConfig cfg = opts.config_path.empty()
                                      ? harness::default_config()
                                      : harness::load_config(opts.config_path);
  if (opts.seed) cfg.seeds = {*opts.seed};
  if (opts.range) cfg.range_sweep = {*opts.range};
  if (opts.pipeline) cfg.pipeline = harness::pipeline_from_string(*opts.pipeline);
  if (opts.backend) cfg.backend = harness::backend_from_string(*opts.backend);
  harness::validate_config(cfg);
  return cfg;
}

fs::path ensure_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("cannot create output directory: " + dir);
  return p;
}

int run_simulate(const CommonOpts& opts) {
  const auto cfg = resolve_config(opts);
  harness::Pipeline pipeline(cfg);
  const auto rec =
      pipeline.run_single(cfg.seeds.front(), cfg.range_sweep.front(),
                          cfg.pipeline);
  std::cout << harness::record_to_json(rec).dump(2) << "\n";
  const auto out = ensure_out_dir(opts.out_dir);
  harness::write_run_records({rec}, (out / "runs.jsonl").string());
  std::cerr << "wrote " << (out / "runs.jsonl").string() << "\n";
  return 0;
}

int run_sweep(const CommonOpts& opts) {
  const auto cfg = resolve_config(opts);
  harness::Pipeline pipeline(cfg);
  std::vector<harness::RunRecord> records;
  const auto result = pipeline.run_sweep(&records);
  const auto out = ensure_out_dir(opts.out_dir);
  harness::write_sweep_csv(result, (out / "sweep.csv").string());
  harness::write_run_records(records, (out / "runs.jsonl").string());
  std::cerr << "wrote " << (out / "sweep.csv").string() << " ("
            << result.rows.size() << " rows, " << records.size()
            << " runs)\n";
  return 0;
}

int run_train(const CommonOpts& opts) {
  const auto cfg = resolve_config(opts);
  harness::Pipeline pipeline(cfg);
  const auto outcome = harness::train_activation_pipeline(pipeline);
  const auto out = ensure_out_dir(opts.out_dir);
  activation::save_policy(outcome.policy, (out / "policy.json").string());
  for (std::size_t c = 0; c < outcome.greedy_per_cluster.size(); ++c) {
    const int a = outcome.greedy_per_cluster[c];
    const auto tag = pipeline.modules().at(static_cast<std::size_t>(a)).task_tag;
    std::cout << "cluster " << c << ": greedy module " << a << " ("
              << cot::to_string(tag) << ")\n";
  }
  std::cerr << "wrote " << (out / "policy.json").string() << "\n";
  return 0;
}

int run_build_exemplars(const CommonOpts& opts) {
  const auto cfg = resolve_config(opts);
  harness::Pipeline pipeline(cfg);
  // Probe at the middle of the range sweep; the shortest range starves
  // coverage and would reject every candidate regardless of quality.
  const auto scenario = pipeline.build_scenario(
      cfg.seeds.front(), cfg.range_sweep[cfg.range_sweep.size() / 2]);

  intent::HashedBowEmbedder embedder;
  cot::MockCotBackend mock;
  std::unique_ptr<cot::HttpChatBackend> http;
  cot::LlmBackend* backend = &mock;
  if (cfg.backend == harness::BackendKind::http) {
    const auto env = harness::endpoints_from_env();
    if (env.llm_base.empty())
      throw ConfigError("http backend requires LLM_API_BASE");
    cot::HttpChatConfig http_cfg;
    http_cfg.base_url = env.llm_base;
    http_cfg.api_key = env.llm_key;
    http = std::make_unique<cot::HttpChatBackend>(http_cfg);
    backend = http.get();
  }

  const auto corpus = harness::builtin_intent_corpus();
  const auto candidates =
      cot::build_auto_cot_exemplars(corpus, 4, *backend, embedder, scenario);

  // Keep only candidates whose answers execute well on the probe scenario.
  harness::ExemplarStore store;
  int kept = 0;
  for (const auto& ex : candidates) {
    cot::ReasoningTrace trace;
    trace.steps = ex.reasoning_chain;
    trace.final_block = ex.answer;
    cot::ControlCommand cmd;
    try {
      cmd = cot::extract_strategy(trace, scenario);
    } catch (const std::exception&) {
      continue;
    }
    const auto deployed = netsim::with_deployment(scenario, cmd.uav_positions,
                                                  cmd.tx_powers_dbm);
    const auto metrics = netsim::evaluate_scenario(deployed);
    std::vector<std::string> step_template;
    for (const auto& mod : pipeline.modules())
      if (mod.task_tag == ex.tag) step_template = mod.step_template;
    const auto fitness = scoring::score_fitness(trace, deployed, cmd, metrics,
                                                step_template);
    const auto [q_c, q_r] = scoring::q_wireless(metrics, deployed);
    const auto utility = scoring::composite_utility(
        cfg.weights, scoring::q_llm(fitness), q_c, q_r);
    if (store.maybe_add(ex.question, trace, ex.tag, utility.q_total,
                        cfg.exemplar_min_q_total))
      ++kept;
  }

  const auto out = ensure_out_dir(opts.out_dir);
  store.save((out / "exemplars.json").string());
  std::cout << "kept " << kept << " of " << candidates.size()
            << " exemplar candidates (threshold q_total >= "
            << cfg.exemplar_min_q_total << ")\n";
  std::cerr << "wrote " << (out / "exemplars.json").string() << "\n";
  return 0;
}

int run_plot(const std::string& csv_path, const CommonOpts& opts) {
  const auto result = harness::sweep_from_csv(csv_path);
  const auto out = ensure_out_dir(opts.out_dir);
  harness::write_sweep_svg(result, (out / "sweep.svg").string());
  std::cerr << "wrote " << (out / "sweep.svg").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intent-driven chain-of-thought controller for UAV networks"};
  app.require_subcommand(1);

  CommonOpts sim_opts, sweep_opts, train_opts, ex_opts, plot_opts;
  std::string plot_input;

  auto* sim = app.add_subcommand("simulate", "Run one episode");
  add_common(sim, sim_opts);
  auto* sweep = app.add_subcommand(
      "sweep", "Run the range sweep over both pipelines");
  add_common(sweep, sweep_opts);
  auto* train = app.add_subcommand("train-activation",
                                   "Train the module-activation policy");
  add_common(train, train_opts);
  auto* build = app.add_subcommand("build-exemplars",
                                   "Build the exemplar store from the corpus");
  add_common(build, ex_opts);
  auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
  plot->add_option("csv", plot_input, "Sweep CSV to plot")->required();
  add_common(plot, plot_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_opts);
    if (sweep->parsed()) return run_sweep(sweep_opts);
    if (train->parsed()) return run_train(train_opts);
    if (build->parsed()) return run_build_exemplars(ex_opts);
    if (plot->parsed()) return run_plot(plot_input, plot_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UnrecognizedIntent& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
