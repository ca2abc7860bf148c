#include "cotnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cotnet/errors.hpp"
#include "cotnet/physics.hpp"

namespace cotnet::harness {

std::string to_string(PipelineKind k) {
  return k == PipelineKind::cot ? "cot" : "non_cot";
}

PipelineKind pipeline_from_string(const std::string& s) {
  if (s == "cot") return PipelineKind::cot;
  if (s == "non_cot" || s == "non-cot") return PipelineKind::non_cot;
  throw ConfigError("pipeline must be cot or non-cot, got: " + s);
}

std::string to_string(BackendKind k) {
  return k == BackendKind::mock ? "mock" : "http";
}

BackendKind backend_from_string(const std::string& s) {
  if (s == "mock") return BackendKind::mock;
  if (s == "http") return BackendKind::http;
  throw ConfigError("backend must be mock or http, got: " + s);
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = {
      {"area_m",
       {{"width", c.scenario.area_m.width},
        {"height", c.scenario.area_m.height}}},
      {"user_count", c.scenario.user_count},
      {"altitude_m", c.scenario.altitude_m},
      {"max_tx_power_dbm", c.scenario.max_tx_power_dbm},
      {"channel",
       {{"carrier_freq_hz", c.scenario.channel.carrier_freq_hz},
        {"bandwidth_hz", c.scenario.channel.bandwidth_hz},
        {"temperature_k", c.scenario.channel.temperature_k},
        {"boltzmann_j_per_k", c.scenario.channel.boltzmann_j_per_k}}}};
  j["range_sweep"] = c.range_sweep;
  j["seeds"] = c.seeds;
  j["pipeline"] = to_string(c.pipeline);
  j["backend"] = to_string(c.backend);
  j["weights"] = {{"alpha", c.weights.alpha}, {"beta", c.weights.beta}};
  j["optimizer"] = {{"coarse_grid_step_m", c.optimizer.coarse_grid_step_m},
                    {"power_step_db", c.optimizer.power_step_db},
                    {"local_search_iters", c.optimizer.local_search_iters},
                    {"local_step_init_m", c.optimizer.local_step_init_m},
                    {"seed", c.optimizer.seed}};
  j["activation"] = {{"episodes", c.activation.episodes},
                     {"lr", c.activation.lr},
                     {"gamma", c.activation.gamma},
                     {"epsilon_start", c.activation.epsilon_start},
                     {"epsilon_end", c.activation.epsilon_end},
                     {"seed", c.activation.seed}};
  j["intent_text"] = c.intent_text;
  j["policy_path"] = c.policy_path;
  j["exemplars_path"] = c.exemplars_path;
  j["exemplar_min_q_total"] = c.exemplar_min_q_total;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    if (s.contains("area_m")) {
      c.scenario.area_m.width = s["area_m"].value("width", 1000.0);
      c.scenario.area_m.height = s["area_m"].value("height", 1000.0);
    }
    c.scenario.user_count = s.value("user_count", c.scenario.user_count);
    c.scenario.altitude_m = s.value("altitude_m", c.scenario.altitude_m);
    c.scenario.max_tx_power_dbm =
        s.value("max_tx_power_dbm", c.scenario.max_tx_power_dbm);
    if (s.contains("channel")) {
      const auto& ch = s["channel"];
      c.scenario.channel.carrier_freq_hz =
          ch.value("carrier_freq_hz", c.scenario.channel.carrier_freq_hz);
      c.scenario.channel.bandwidth_hz =
          ch.value("bandwidth_hz", c.scenario.channel.bandwidth_hz);
      c.scenario.channel.temperature_k =
          ch.value("temperature_k", c.scenario.channel.temperature_k);
      c.scenario.channel.boltzmann_j_per_k =
          ch.value("boltzmann_j_per_k", c.scenario.channel.boltzmann_j_per_k);
    }
  }
  if (j.contains("range_sweep"))
    c.range_sweep = j["range_sweep"].get<std::vector<double>>();
  if (j.contains("seeds"))
    c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("pipeline"))
    c.pipeline = pipeline_from_string(j["pipeline"].get<std::string>());
  if (j.contains("backend"))
    c.backend = backend_from_string(j["backend"].get<std::string>());
  if (j.contains("weights")) {
    c.weights.alpha = j["weights"].value("alpha", c.weights.alpha);
    c.weights.beta = j["weights"].value("beta", c.weights.beta);
  }
  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    c.optimizer.coarse_grid_step_m =
        o.value("coarse_grid_step_m", c.optimizer.coarse_grid_step_m);
    c.optimizer.power_step_db =
        o.value("power_step_db", c.optimizer.power_step_db);
    c.optimizer.local_search_iters =
        o.value("local_search_iters", c.optimizer.local_search_iters);
    c.optimizer.local_step_init_m =
        o.value("local_step_init_m", c.optimizer.local_step_init_m);
    c.optimizer.seed = o.value("seed", c.optimizer.seed);
  }
  if (j.contains("activation")) {
    const auto& a = j["activation"];
    c.activation.episodes = a.value("episodes", c.activation.episodes);
    c.activation.lr = a.value("lr", c.activation.lr);
    c.activation.gamma = a.value("gamma", c.activation.gamma);
    c.activation.epsilon_start =
        a.value("epsilon_start", c.activation.epsilon_start);
    c.activation.epsilon_end = a.value("epsilon_end", c.activation.epsilon_end);
    c.activation.seed = a.value("seed", c.activation.seed);
  }
  c.intent_text = j.value("intent_text", c.intent_text);
  c.policy_path = j.value("policy_path", c.policy_path);
  c.exemplars_path = j.value("exemplars_path", c.exemplars_path);
  c.exemplar_min_q_total =
      j.value("exemplar_min_q_total", c.exemplar_min_q_total);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config file is not JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c = config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") +
                      e.what());
  }
  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.seeds.empty()) throw ConfigError("seeds must be non-empty");
  if (c.range_sweep.empty()) throw ConfigError("range_sweep must be non-empty");
  for (double r : c.range_sweep)
    if (r < 200.0 || r > 600.0)
      throw ConfigError("range_sweep values must lie in [200, 600]");
  if (c.scenario.user_count < 1)
    throw ConfigError("user_count must be >= 1");
  if (c.scenario.area_m.width <= 0.0 || c.scenario.area_m.height <= 0.0)
    throw ConfigError("area dimensions must be positive");
  if (c.scenario.altitude_m <= 0.0)
    throw ConfigError("altitude must be positive");
  if (c.scenario.max_tx_power_dbm < 0.0)
    throw ConfigError("max_tx_power_dbm must be >= 0");
  if (c.weights.alpha < 0.0 || c.weights.beta < 0.0)
    throw ConfigError("utility weights must be >= 0");
  if (c.optimizer.coarse_grid_step_m <= 0.0 ||
      c.optimizer.power_step_db <= 0.0 ||
      c.optimizer.local_step_init_m <= 0.0)
    throw ConfigError("optimizer steps must be positive");
  if (c.optimizer.local_search_iters < 1)
    throw ConfigError("local_search_iters must be >= 1");
  if (c.activation.episodes < 1)
    throw ConfigError("activation episodes must be >= 1");
  if (!(c.activation.lr > 0.0 && c.activation.lr <= 1.0))
    throw ConfigError("activation lr must be in (0, 1]");
  if (!(c.activation.gamma >= 0.0 && c.activation.gamma < 1.0))
    throw ConfigError("activation gamma must be in [0, 1)");
  if (c.intent_text.empty()) throw ConfigError("intent_text must be non-empty");
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  return intent::fnv1a64(config_to_json(c).dump());
}

std::string config_hash_hex(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(c)));
  return buf;
}

nlohmann::json record_to_json(const RunRecord& r) {
  nlohmann::json cmd;
  cmd["uav_positions"] = nlohmann::json::array();
  for (const auto& p : r.command.uav_positions)
    cmd["uav_positions"].push_back({p[0], p[1]});
  cmd["tx_powers_dbm"] = r.command.tx_powers_dbm;
  if (!r.command.assignments.empty()) {
    nlohmann::json a = nlohmann::json::object();
    for (const auto& [user, uav] : r.command.assignments)
      a[std::to_string(user)] = uav;
    cmd["assignments"] = a;
  }
  return {{"config_hash", r.config_hash},
          {"seed", r.seed},
          {"range_m", r.range_m},
          {"pipeline", r.pipeline},
          {"backend", r.backend_id},
          {"utility",
           {{"alpha", r.utility.weights.alpha},
            {"beta", r.utility.weights.beta},
            {"q_llm", r.utility.q_llm},
            {"q_c", r.utility.q_c},
            {"q_r", r.utility.q_r},
            {"q_wireless", r.utility.q_wireless},
            {"q_total", r.utility.q_total}}},
          {"metrics",
           {{"coverage_ratio", r.coverage_ratio},
            {"sum_rate_bps", r.sum_rate_bps},
            {"covered_users", r.covered_users}}},
          {"command", cmd},
          {"trace_steps", r.trace_steps},
          {"error", r.error},
          {"wall_clock_ms", r.wall_clock_ms}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.range_m = j.at("range_m").get<double>();
  r.pipeline = j.at("pipeline").get<std::string>();
  r.backend_id = j.at("backend").get<std::string>();
  const auto& u = j.at("utility");
  r.utility.weights.alpha = u.at("alpha").get<double>();
  r.utility.weights.beta = u.at("beta").get<double>();
  r.utility.q_llm = u.at("q_llm").get<double>();
  r.utility.q_c = u.at("q_c").get<double>();
  r.utility.q_r = u.at("q_r").get<double>();
  r.utility.q_wireless = u.at("q_wireless").get<double>();
  r.utility.q_total = u.at("q_total").get<double>();
  const auto& m = j.at("metrics");
  r.coverage_ratio = m.at("coverage_ratio").get<double>();
  r.sum_rate_bps = m.at("sum_rate_bps").get<double>();
  r.covered_users = m.at("covered_users").get<int>();
  const auto& cmd = j.at("command");
  for (const auto& p : cmd.at("uav_positions"))
    r.command.uav_positions.push_back(
        {p[0].get<double>(), p[1].get<double>()});
  r.command.tx_powers_dbm =
      cmd.at("tx_powers_dbm").get<std::vector<double>>();
  if (cmd.contains("assignments"))
    for (const auto& [key, value] : cmd["assignments"].items())
      r.command.assignments[std::stoi(key)] = value.get<int>();
  r.trace_steps = j.at("trace_steps").get<int>();
  r.error = j.at("error").get<std::string>();
  r.wall_clock_ms = j.at("wall_clock_ms").get<double>();
  return r;
}

bool records_equivalent(const RunRecord& a, const RunRecord& b) {
  nlohmann::json ja = record_to_json(a);
  nlohmann::json jb = record_to_json(b);
  ja.erase("wall_clock_ms");
  jb.erase("wall_clock_ms");
  return ja == jb;
}

void write_run_records(const std::vector<RunRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write run records: " + path);
  for (const auto& r : records) out << record_to_json(r).dump() << "\n";
}

namespace {

std::string g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string sweep_to_csv(const SweepResult& result) {
  std::string out =
      "range_m,pipeline,mean_coverage,mean_sum_rate_bps,mean_q_total,"
      "std_coverage,std_sum_rate_bps,std_q_total,n\n";
  for (const auto& r : result.rows) {
    out += g9(r.range_m) + "," + r.pipeline + "," + g9(r.mean_coverage) + "," +
           g9(r.mean_sum_rate_bps) + "," + g9(r.mean_q_total) + "," +
           g9(r.std_coverage) + "," + g9(r.std_sum_rate_bps) + "," +
           g9(r.std_q_total) + "," + std::to_string(r.n) + "\n";
  }
  return out;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write sweep CSV: " + path);
  out << sweep_to_csv(result);
}

SweepResult sweep_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read sweep CSV: " + path);
  SweepResult result;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 9)
      throw ParseError("sweep CSV row does not have 9 fields: " + line);
    SweepRow r;
    r.range_m = std::strtod(fields[0].c_str(), nullptr);
    r.pipeline = fields[1];
    r.mean_coverage = std::strtod(fields[2].c_str(), nullptr);
    r.mean_sum_rate_bps = std::strtod(fields[3].c_str(), nullptr);
    r.mean_q_total = std::strtod(fields[4].c_str(), nullptr);
    r.std_coverage = std::strtod(fields[5].c_str(), nullptr);
    r.std_sum_rate_bps = std::strtod(fields[6].c_str(), nullptr);
    r.std_q_total = std::strtod(fields[7].c_str(), nullptr);
    r.n = std::atoi(fields[8].c_str());
    result.rows.push_back(r);
  }
  return result;
}

void write_sweep_svg(const SweepResult& result, const std::string& path) {
  // Two panels: coverage (left) and sum rate (right) versus range, one
  // polyline per pipeline in each panel.
  const double w = 480.0, h = 360.0, pad = 56.0;
  double rmin = 1e300, rmax = -1e300, rate_max = 1.0;
  std::vector<std::string> pipelines;
  for (const auto& r : result.rows) {
    rmin = std::min(rmin, r.range_m);
    rmax = std::max(rmax, r.range_m);
    rate_max = std::max(rate_max, r.mean_sum_rate_bps);
    if (std::find(pipelines.begin(), pipelines.end(), r.pipeline) ==
        pipelines.end())
      pipelines.push_back(r.pipeline);
  }
  if (rmin >= rmax) {
    rmin -= 1.0;
    rmax += 1.0;
  }
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << 2 * w << " " << h
      << "\">\n";
  auto panel = [&](double x0, const std::string& title, bool rate_panel) {
    svg << "<g>\n";
    svg << "<rect x=\"" << x0 + pad << "\" y=\"" << pad << "\" width=\""
        << w - 2 * pad << "\" height=\"" << h - 2 * pad
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << pad - 16
        << "\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    for (std::size_t pi = 0; pi < pipelines.size(); ++pi) {
      std::ostringstream points;
      std::ostringstream labels;
      for (const auto& r : result.rows) {
        if (r.pipeline != pipelines[pi]) continue;
        const double vx = x0 + pad + (w - 2 * pad) * (r.range_m - rmin) /
                                         (rmax - rmin);
        const double value =
            rate_panel ? r.mean_sum_rate_bps / rate_max : r.mean_coverage;
        const double vy = h - pad - (h - 2 * pad) * value;
        points << vx << "," << vy << " ";
        labels << "<text x=\"" << vx << "\" y=\"" << vy - 6
               << "\" font-size=\"8\" text-anchor=\"middle\">"
               << g9(rate_panel ? r.mean_sum_rate_bps : r.mean_coverage)
               << "</text>\n";
      }
      svg << "<polyline fill=\"none\" stroke=\"" << colors[pi % 4]
          << "\" stroke-width=\"2\" points=\"" << points.str() << "\"/>\n";
      svg << labels.str();
      svg << "<text x=\"" << x0 + pad + 8 << "\" y=\""
          << pad + 16 + 14 * static_cast<double>(pi) << "\" font-size=\"11\" fill=\""
          << colors[pi % 4] << "\">" << pipelines[pi] << "</text>\n";
    }
    svg << "<text x=\"" << x0 + w / 2 << "\" y=\"" << h - pad + 32
        << "\" text-anchor=\"middle\" font-size=\"11\">communication range "
           "(m)</text>\n";
    svg << "</g>\n";
  };
  panel(0.0, "mean coverage ratio", false);
  panel(w, "mean sum rate (bps)", true);
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write SVG: " + path);
  out << svg.str();
}

std::vector<intent::IntentText> builtin_intent_corpus() {
  return {
      {0,
       "Deploy a UAV base station that maximizes both coverage and user data "
       "rates."},
      {1, "Maximize the coverage of ground users in the service area."},
      {2, "Improve the total throughput for all connected users."},
      {3, "Reduce the energy consumption of the aerial base station."},
      {4, "Keep latency below 20 ms for all users."},
      {5,
       "Provide at least 35% coverage while limiting transmit power to at "
       "most 15 dBm."},
      {6, "Boost cell-edge data rates without exceeding the power budget."},
      {7,
       "Cover the northern district and sustain high throughput during peak "
       "hours."},
      {8, "Minimize power consumption while keeping every terminal attached."},
      {9,
       "Guarantee a data rate of at least 50 Mbps for video streaming "
       "users."},
      {10, "Balance coverage and delay for emergency responders."},
      {11, "Serve more users with reliable coverage at the cell edge."},
      {12, "Monitor the perimeter for unauthorized access attempts."},
      {13,
       "Flag suspicious traffic patterns and isolate compromised devices."}};
}

IntentCatalog::IntentCatalog(const std::vector<intent::IntentText>& corpus,
                             intent::Embedder& embedder, int k,
                             std::uint64_t seed) {
  std::vector<intent::IntentEmbedding> embs;
  embs.reserve(corpus.size());
  for (const auto& q : corpus)
    embs.push_back(intent::embed_intent(q, embedder));
  clusters_ = intent::cluster_intents(embs, k, seed, 100);
}

int IntentCatalog::assign(const std::string& text,
                          intent::Embedder& embedder) const {
  return intent::nearest_centroid(embedder.embed(text), clusters_.centroids);
}

Pipeline::Pipeline(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
  hash_hex_ = config_hash_hex(cfg_);
  if (cfg_.backend == BackendKind::http) {
    const auto env = endpoints_from_env();
    if (env.llm_base.empty())
      throw ConfigError("http backend requires LLM_API_BASE");
    cot::HttpChatConfig http_cfg;
    http_cfg.base_url = env.llm_base;
    http_cfg.api_key = env.llm_key;
    http_ = std::make_unique<cot::HttpChatBackend>(http_cfg);
    if (!env.embed_base.empty()) {
      intent::HttpEmbedderConfig embed_cfg;
      embed_cfg.base_url = env.embed_base;
      embed_cfg.api_key = env.embed_key;
      http_embedder_ = std::make_unique<intent::HttpEmbedder>(embed_cfg);
    }
  }
  catalog_ = std::make_unique<IntentCatalog>(builtin_intent_corpus(),
                                             embedder(), 4, 0);
  modules_ = cot::default_modules();
  if (!cfg_.exemplars_path.empty()) {
    const auto store = ExemplarStore::load(cfg_.exemplars_path);
    for (auto& mod : modules_) mod.exemplars = store.for_tag(mod.task_tag);
  }
  if (!cfg_.policy_path.empty())
    policy_ = activation::load_policy(cfg_.policy_path);

  mock_cot_ = std::make_unique<cot::MockCotBackend>();
  mock_non_cot_ = std::make_unique<cot::MockNonCotBackend>();

  intent_cluster_ = catalog_->assign(cfg_.intent_text, embedder());
  parsed_ = intent::parse_intent({-1, cfg_.intent_text}, intent_cluster_);
}

intent::Embedder& Pipeline::embedder() {
  if (http_embedder_) return *http_embedder_;
  return embedder_;
}

int Pipeline::assign_cluster(const std::string& text) {
  return catalog_->assign(text, embedder());
}

netsim::NetworkScenario Pipeline::build_scenario(std::uint64_t seed,
                                                 double range_m) const {
  netsim::NetworkScenario s;
  s.area_m = cfg_.scenario.area_m;
  s.channel = cfg_.scenario.channel;
  s.max_tx_power_dbm = cfg_.scenario.max_tx_power_dbm;
  s.users = netsim::generate_users(seed, cfg_.scenario.user_count, s.area_m);
  netsim::UavNode uav;
  uav.id = 0;
  uav.position = {s.area_m.width / 2.0, s.area_m.height / 2.0,
                  cfg_.scenario.altitude_m};
  uav.tx_power_dbm = s.max_tx_power_dbm;
  uav.comm_range_m = range_m;
  s.uavs = {uav};
  netsim::validate_scenario(s);
  return s;
}

cot::LlmBackend& Pipeline::backend_for(PipelineKind kind) {
  if (kind == PipelineKind::non_cot) return *mock_non_cot_;
  if (cfg_.backend == BackendKind::http) return *http_;
  return *mock_cot_;
}

int Pipeline::choose_module(int cluster, double range_m,
                            const std::set<intent::Objective>& objectives,
                            std::uint64_t cell_stream) {
  if (policy_) {
    activation::ActivationPolicy local = *policy_;
    local.rng = Splitmix64(cell_stream);
    const auto state = activation::make_state(
        cluster, cfg_.scenario.user_count, cfg_.scenario.area_m.width,
        cfg_.scenario.area_m.height, range_m, cfg_.scenario.max_tx_power_dbm);
    return activation::select_module(state, local);
  }
  const cot::TaskTag tag = cot::tag_for_objectives(objectives);
  for (const auto& mod : modules_)
    if (mod.task_tag == tag) return mod.id;
  return 0;
}

RunRecord Pipeline::run_single(std::uint64_t seed, double range_m,
                               PipelineKind kind, int module_override,
                               std::uint64_t cell_stream) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto scenario = build_scenario(seed, range_m);

  const int module_id =
      module_override >= 0
          ? module_override
          : choose_module(intent_cluster_, range_m, parsed_.objectives,
                          cell_stream);
  const auto& module = modules_.at(static_cast<std::size_t>(module_id));

  auto prompt = cot::compose_prompt(module, parsed_, scenario);
  if (kind == PipelineKind::non_cot) {
    prompt.task_instruction =
        "Answer directly with only the strategy block; do not show any "
        "reasoning.";
  }

  const auto trace =
      cot::invoke_backend(backend_for(kind), prompt, scenario);

  RunRecord rec;
  rec.config_hash = hash_hex_;
  rec.seed = seed;
  rec.range_m = range_m;
  rec.pipeline = to_string(kind);
  rec.backend_id = trace.backend_id;
  rec.trace_steps = static_cast<int>(trace.steps.size());

  cot::ControlCommand cmd;
  try {
    cmd = cot::extract_strategy(trace, scenario);
  } catch (const ValidationError& e) {
    rec.error = "validation(" + e.field() + "): " + e.what();
  } catch (const ParseError& e) {
    rec.error = std::string("parse: ") + e.what();
  }
  if (!rec.error.empty()) {
    const auto fallback = opt::centroid_baseline(scenario);
    cmd = cot::ControlCommand{};
    for (const auto& p : fallback.uav_positions)
      cmd.uav_positions.push_back({p.x, p.y});
    cmd.tx_powers_dbm = fallback.tx_powers_dbm;
  }

  const auto deployed =
      netsim::with_deployment(scenario, cmd.uav_positions, cmd.tx_powers_dbm);
  const auto metrics = netsim::evaluate_scenario(deployed);

  const auto fitness = scoring::score_fitness(trace, deployed, cmd, metrics,
                                              module.step_template);
  const auto [q_c, q_r] = scoring::q_wireless(metrics, deployed);
  rec.utility = scoring::composite_utility(cfg_.weights,
                                           scoring::q_llm(fitness), q_c, q_r);
  rec.coverage_ratio = metrics.coverage_ratio;
  rec.sum_rate_bps = metrics.sum_rate_bps;
  rec.covered_users = static_cast<int>(
      std::count(metrics.covered_flags.begin(), metrics.covered_flags.end(),
                 true));
  rec.command = cmd;

  const auto t1 = std::chrono::steady_clock::now();
  rec.wall_clock_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

SweepResult Pipeline::run_sweep(std::vector<RunRecord>* records) {
  const std::size_t n_ranges = cfg_.range_sweep.size();
  const std::size_t n_seeds = cfg_.seeds.size();
  const std::size_t total = n_ranges * n_seeds * 2;
  std::vector<RunRecord> cells(total);
  const std::uint64_t base = config_hash(cfg_);

#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < static_cast<long long>(total); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::size_t ri = idx / (n_seeds * 2);
    const std::size_t si = (idx / 2) % n_seeds;
    const PipelineKind kind =
        (idx % 2 == 0) ? PipelineKind::cot : PipelineKind::non_cot;
    const std::uint64_t cell_stream =
        Splitmix64(base ^ static_cast<std::uint64_t>(idx)).next();
    try {
      cells[idx] = run_single(cfg_.seeds[si], cfg_.range_sweep[ri], kind, -1,
                              cell_stream);
    } catch (const std::exception& e) {
      cells[idx].config_hash = hash_hex_;
      cells[idx].seed = cfg_.seeds[si];
      cells[idx].range_m = cfg_.range_sweep[ri];
      cells[idx].pipeline = to_string(kind);
      cells[idx].error = std::string("hard failure: ") + e.what();
    }
  }

  if (records)
    records->insert(records->end(), cells.begin(), cells.end());

  SweepResult result;
  for (std::size_t ri = 0; ri < n_ranges; ++ri) {
    for (const PipelineKind kind : {PipelineKind::cot, PipelineKind::non_cot}) {
      SweepRow row;
      row.range_m = cfg_.range_sweep[ri];
      row.pipeline = to_string(kind);
      row.n = static_cast<int>(n_seeds);
      std::vector<double> cov, rate, q;
      for (std::size_t si = 0; si < n_seeds; ++si) {
        const std::size_t idx =
            (ri * n_seeds + si) * 2 + (kind == PipelineKind::cot ? 0 : 1);
        cov.push_back(cells[idx].coverage_ratio);
        rate.push_back(cells[idx].sum_rate_bps);
        q.push_back(cells[idx].utility.q_total);
      }
      auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      auto stddev = [&](const std::vector<double>& v, double mu) {
        if (v.size() < 2) return 0.0;
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
      };
      row.mean_coverage = mean(cov);
      row.mean_sum_rate_bps = mean(rate);
      row.mean_q_total = mean(q);
      row.std_coverage = stddev(cov, row.mean_coverage);
      row.std_sum_rate_bps = stddev(rate, row.mean_sum_rate_bps);
      row.std_q_total = stddev(q, row.mean_q_total);
      result.rows.push_back(row);
    }
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const SweepRow& a, const SweepRow& b) {
              if (a.range_m != b.range_m) return a.range_m < b.range_m;
              return a.pipeline < b.pipeline;
            });
  return result;
}

PipelineEpisodeOracle::PipelineEpisodeOracle(Pipeline& pipeline,
                                             std::uint64_t env_seed)
    : pipeline_(pipeline), rng_(env_seed) {
  for (const auto& q : builtin_intent_corpus()) {
    const int cluster = pipeline_.assign_cluster(q.text);
    try {
      intent::parse_intent(q, cluster);
    } catch (const UnrecognizedIntent&) {
      continue;
    }
    parseable_.push_back(q);
    clusters_.push_back(cluster);
  }
}

int PipelineEpisodeOracle::n_actions() const {
  return static_cast<int>(pipeline_.modules().size());
}

activation::ActivationState PipelineEpisodeOracle::sample_state() {
  const auto& cfg = pipeline_.config();
  const auto pick = rng_.uniform_int(
      static_cast<std::uint32_t>(parseable_.size()));
  episode_seed_ = rng_.next();
  episode_range_ = cfg.range_sweep[rng_.uniform_int(
      static_cast<std::uint32_t>(cfg.range_sweep.size()))];
  return activation::make_state(
      clusters_[pick], cfg.scenario.user_count, cfg.scenario.area_m.width,
      cfg.scenario.area_m.height, episode_range_,
      cfg.scenario.max_tx_power_dbm);
}

double PipelineEpisodeOracle::reward(const activation::ActivationState&,
                                     int action) {
  // With mock backends the executed command depends on the scenario and the
  // chosen module only, so the drawn intent enters through the state alone.
  const auto rec = pipeline_.run_single(episode_seed_, episode_range_,
                                        PipelineKind::cot, action,
                                        episode_seed_);
  return rec.utility.q_total;
}

TrainOutcome train_activation_pipeline(Pipeline& pipeline) {
  const auto& cfg = pipeline.config();
  PipelineEpisodeOracle env(pipeline,
                            Splitmix64(cfg.activation.seed).next());
  TrainOutcome out{activation::train_activation(env, cfg.activation), {}};
  for (int c = 0; c < 4; ++c) {
    const auto state = activation::make_state(
        c, cfg.scenario.user_count, cfg.scenario.area_m.width,
        cfg.scenario.area_m.height, 400.0, cfg.scenario.max_tx_power_dbm);
    out.greedy_per_cluster.push_back(
        out.policy.q.argmax(activation::state_id(state)));
  }
  return out;
}

std::pair<double, double> compare_policies(
    Pipeline& pipeline, const activation::ActivationPolicy& trained,
    int episodes, std::uint64_t eval_seed) {
  PipelineEpisodeOracle env_trained(pipeline, eval_seed);
  PipelineEpisodeOracle env_random(pipeline, eval_seed);
  activation::ActivationPolicy greedy = trained;
  greedy.epsilon = 0.0;
  Splitmix64 coin(eval_seed ^ 0x517CC1B727220A95ULL);

  double sum_trained = 0.0, sum_random = 0.0;
  for (int e = 0; e < episodes; ++e) {
    const auto s1 = env_trained.sample_state();
    const int a1 = activation::select_module(s1, greedy);
    sum_trained += env_trained.reward(s1, a1);

    const auto s2 = env_random.sample_state();
    const int a2 = static_cast<int>(
        coin.uniform_int(static_cast<std::uint32_t>(env_random.n_actions())));
    sum_random += env_random.reward(s2, a2);
  }
  return {sum_trained / episodes, sum_random / episodes};
}

ExemplarStore ExemplarStore::load(const std::string& path) {
  ExemplarStore store;
  std::ifstream in(path);
  if (!in) return store;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("exemplar store is not JSON: ") + e.what());
  }
  for (const auto& item : j.value("records", nlohmann::json::array())) {
    cot::ExemplarRecord ex;
    ex.question = item.at("question").get<std::string>();
    ex.reasoning_chain =
        item.at("reasoning_chain").get<std::vector<std::string>>();
    ex.answer = item.at("answer").get<std::string>();
    ex.tag = cot::task_tag_from_string(item.at("tag").get<std::string>());
    store.records.push_back(std::move(ex));
  }
  return store;
}

void ExemplarStore::save(const std::string& path) const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& ex : records) {
    arr.push_back({{"question", ex.question},
                   {"reasoning_chain", ex.reasoning_chain},
                   {"answer", ex.answer},
                   {"tag", cot::to_string(ex.tag)}});
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write exemplar store: " + path);
  out << nlohmann::json{{"records", arr}}.dump(2) << "\n";
}

std::vector<cot::ExemplarRecord> ExemplarStore::for_tag(
    cot::TaskTag tag) const {
  std::vector<cot::ExemplarRecord> out;
  for (const auto& ex : records)
    if (ex.tag == tag) out.push_back(ex);
  return out;
}

bool ExemplarStore::maybe_add(const std::string& question,
                              const cot::ReasoningTrace& trace,
                              cot::TaskTag tag, double q_total,
                              double min_q_total) {
  if (q_total < min_q_total) return false;
  if (trace.steps.empty() || trace.final_block.empty()) return false;
  cot::ExemplarRecord ex;
  ex.question = question;
  ex.reasoning_chain = trace.steps;
  ex.answer = trace.final_block;
  ex.tag = tag;
  records.push_back(std::move(ex));
  return true;
}

HttpEndpoints endpoints_from_env() {
  HttpEndpoints e;
  if (const char* v = std::getenv("LLM_API_BASE")) e.llm_base = v;
  if (const char* v = std::getenv("LLM_API_KEY")) e.llm_key = v;
  if (const char* v = std::getenv("EMBED_API_BASE")) e.embed_base = v;
  if (const char* v = std::getenv("EMBED_API_KEY")) e.embed_key = v;
  return e;
}

}  // namespace cotnet::harness
