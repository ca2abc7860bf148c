#include "cotnet/backend.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotnet/errors.hpp"
#include "cotnet/optimizer.hpp"
#include "cotnet/physics.hpp"

namespace cotnet::cot {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool mentions(const std::string& text, const char* needle) {
  return text.find(needle) != std::string::npos;
}

ControlCommand to_command(const opt::DeploymentDecision& d) {
  ControlCommand cmd;
  for (const auto& p : d.uav_positions)
    cmd.uav_positions.push_back({p.x, p.y});
  cmd.tx_powers_dbm = d.tx_powers_dbm;
  return cmd;
}

// Best coarse-grid position per slot with power pinned at the cap.
opt::DeploymentDecision grid_at_max_power(
    const netsim::NetworkScenario& scenario, double grid_step_m) {
  opt::DeploymentDecision d;
  for (const auto& uav : scenario.uavs) {
    d.uav_positions.push_back(uav.position);
    d.tx_powers_dbm.push_back(scenario.max_tx_power_dbm);
  }
  for (std::size_t slot = 0; slot < scenario.uavs.size(); ++slot) {
    double best_obj = -std::numeric_limits<double>::infinity();
    double best_x = 0.0, best_y = 0.0;
    for (double y = 0.0; y <= scenario.area_m.height + 1e-9; y += grid_step_m)
      for (double x = 0.0; x <= scenario.area_m.width + 1e-9; x += grid_step_m) {
        d.uav_positions[slot].x = std::min(x, scenario.area_m.width);
        d.uav_positions[slot].y = std::min(y, scenario.area_m.height);
        const double obj = opt::wireless_objective(scenario, d);
        if (obj > best_obj) {
          best_obj = obj;
          best_x = d.uav_positions[slot].x;
          best_y = d.uav_positions[slot].y;
        }
      }
    d.uav_positions[slot].x = best_x;
    d.uav_positions[slot].y = best_y;
  }
  return d;
}

// Area-center position per slot, best 2 dB power level.
opt::DeploymentDecision center_power_sweep(
    const netsim::NetworkScenario& scenario) {
  opt::DeploymentDecision d;
  for (const auto& uav : scenario.uavs) {
    auto pos = uav.position;
    pos.x = scenario.area_m.width / 2.0;
    pos.y = scenario.area_m.height / 2.0;
    d.uav_positions.push_back(pos);
    d.tx_powers_dbm.push_back(0.0);
  }
  for (std::size_t slot = 0; slot < scenario.uavs.size(); ++slot) {
    double best_obj = -std::numeric_limits<double>::infinity();
    double best_p = 0.0;
    for (double p = 0.0; p <= scenario.max_tx_power_dbm + 1e-9; p += 2.0) {
      d.tx_powers_dbm[slot] = std::min(p, scenario.max_tx_power_dbm);
      const double obj = opt::wireless_objective(scenario, d);
      if (obj > best_obj) {
        best_obj = obj;
        best_p = d.tx_powers_dbm[slot];
      }
    }
    d.tx_powers_dbm[slot] = best_p;
  }
  return d;
}

netsim::NetworkMetrics metrics_of(const netsim::NetworkScenario& scenario,
                                  const opt::DeploymentDecision& d) {
  std::vector<std::array<double, 2>> xy;
  for (const auto& p : d.uav_positions) xy.push_back({p.x, p.y});
  return netsim::evaluate_scenario(
      netsim::with_deployment(scenario, xy, d.tx_powers_dbm));
}

}  // namespace

ReasoningTrace MockCotBackend::invoke(const PromptBundle& prompt,
                                      const netsim::NetworkScenario& scenario) {
  enum class Mode { generic, deployment, power_control, joint };
  Mode mode = Mode::generic;
  if (mentions(prompt.task_instruction, "placement search"))
    mode = Mode::deployment;
  else if (mentions(prompt.task_instruction, "power tuning"))
    mode = Mode::power_control;
  else if (mentions(prompt.task_instruction, "solving"))
    mode = Mode::joint;
  else if (mentions(prompt.task_instruction, "propose solution"))
    mode = Mode::generic;
  else if (mentions(prompt.task_instruction, kZeroShotTrigger))
    mode = Mode::joint;

  opt::DeploymentDecision decision;
  std::string solve_step;
  switch (mode) {
    case Mode::joint:
      decision = opt::optimize_deployment(scenario, opt::OptimizerConfig{});
      solve_step = "4. Solving: pattern search refined the coarse grid; "
                   "best found position (" +
                   num(decision.uav_positions[0].x) + ", " +
                   num(decision.uav_positions[0].y) +
                   ") with transmit power " + num(decision.tx_powers_dbm[0]) +
                   " dBm.";
      break;
    case Mode::deployment:
      decision = grid_at_max_power(scenario, 100.0);
      solve_step = "4. Placement search: best 100 m grid cell is position (" +
                   num(decision.uav_positions[0].x) + ", " +
                   num(decision.uav_positions[0].y) +
                   ") at transmit power " + num(decision.tx_powers_dbm[0]) +
                   " dBm.";
      break;
    case Mode::power_control:
      decision = center_power_sweep(scenario);
      solve_step = "4. Power tuning: holding the area-center position (" +
                   num(decision.uav_positions[0].x) + ", " +
                   num(decision.uav_positions[0].y) +
                   "), the best transmit power is " +
                   num(decision.tx_powers_dbm[0]) + " dBm.";
      break;
    case Mode::generic:
      decision = opt::centroid_baseline(scenario);
      break;
  }

  const auto metrics = metrics_of(scenario, decision);
  ReasoningTrace trace;
  trace.backend_id = id();

  if (mode == Mode::generic) {
    trace.steps = {
        "1. Restate task: place the UAV base station so the listed users are "
        "served well.",
        "2. Propose solution: hover at the user centroid position (" +
            num(decision.uav_positions[0].x) + ", " +
            num(decision.uav_positions[0].y) + ") with transmit power " +
            num(decision.tx_powers_dbm[0]) + " dBm; coverage ratio " +
            num(metrics.coverage_ratio) + ", sum rate " +
            num(metrics.sum_rate_bps / 1e6) + " Mbps."};
  } else {
    trace.steps = {
        "1. Intent translation: the request maps to coverage and rate goals "
        "for the UAV cell.",
        "2. Parameter extraction: " + std::to_string(scenario.users.size()) +
            " users; area " + num(scenario.area_m.width) + " m by " +
            num(scenario.area_m.height) + " m; maximum transmit power " +
            num(scenario.max_tx_power_dbm) + " dBm; communication range " +
            num(scenario.uavs.empty() ? 0.0
                                      : scenario.uavs.front().comm_range_m) +
            " m.",
        "3. Problem formulation: maximize the coverage fraction plus the "
        "normalized sum rate over position and power, subject to the power "
        "cap and area bounds.",
        solve_step,
        "5. Utility computation: coverage ratio " +
            num(metrics.coverage_ratio) + ", sum rate " +
            num(metrics.sum_rate_bps / 1e6) + " Mbps."};
  }

  trace.final_block = command_to_block(to_command(decision));
  return trace;
}

ReasoningTrace MockNonCotBackend::invoke(
    const PromptBundle&, const netsim::NetworkScenario& scenario) {
  opt::DeploymentDecision d;
  for (const auto& uav : scenario.uavs) {
    auto pos = uav.position;
    pos.x = scenario.area_m.width / 2.0;
    pos.y = scenario.area_m.height / 2.0;
    d.uav_positions.push_back(pos);
    d.tx_powers_dbm.push_back(scenario.max_tx_power_dbm);
  }
  ReasoningTrace trace;
  trace.backend_id = id();
  trace.final_block = command_to_block(to_command(d));
  return trace;
}

ReasoningTrace HttpChatBackend::invoke(const PromptBundle& prompt,
                                       const netsim::NetworkScenario&) {
  nlohmann::json messages = nlohmann::json::array();
  messages.push_back(
      {{"role", "system"}, {"content", prompt.system_preamble}});
  std::string user;
  for (const std::string* part :
       {&prompt.exemplar_block, &prompt.scenario_summary,
        &prompt.task_instruction, &prompt.output_schema_instruction}) {
    if (part->empty()) continue;
    if (!user.empty()) user += "\n\n";
    user += *part;
  }
  messages.push_back({{"role", "user"}, {"content", user}});
  const nlohmann::json body{{"model", cfg_.model},
                            {"messages", messages},
                            {"temperature", cfg_.temperature}};

  httplib::Result res;
  int attempt = 1;
  for (;; ++attempt) {
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_s, 0);
    client.set_read_timeout(cfg_.timeout_s, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    res = client.Post("/v1/chat/completions", headers, body.dump(),
                      "application/json");
    if (!res) {
      if (attempt < cfg_.max_attempts) continue;
      if (res.error() == httplib::Error::ConnectionTimeout ||
          res.error() == httplib::Error::Read)
        throw TimeoutError("chat endpoint timed out", attempt);
      throw TransportError(
          "chat endpoint unreachable: " + httplib::to_string(res.error()), 0,
          attempt);
    }
    if (res->status >= 500 && attempt < cfg_.max_attempts) continue;
    break;
  }
  if (res->status < 200 || res->status >= 300)
    throw TransportError(
        "chat endpoint returned HTTP " + std::to_string(res->status),
        res->status, attempt);

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedReply(std::string("chat reply is not JSON: ") + e.what());
  }
  if (!reply.contains("choices") || reply["choices"].empty() ||
      !reply["choices"][0].contains("message"))
    throw MalformedReply("chat reply has no choices[0].message");
  const std::string content =
      reply["choices"][0]["message"].value("content", "");

  ReasoningTrace trace;
  trace.backend_id = id();
  trace.final_block = extract_fenced_payload(content);
  const auto fence_at =
      content.rfind(std::string("```") + kStrategyFenceTag);
  trace.steps = split_steps(content.substr(0, fence_at));
  if (reply.contains("usage")) {
    const auto& usage = reply["usage"];
    if (usage.contains("prompt_tokens"))
      trace.prompt_tokens = usage["prompt_tokens"].get<int>();
    if (usage.contains("completion_tokens"))
      trace.completion_tokens = usage["completion_tokens"].get<int>();
  }
  return trace;
}

ReasoningTrace invoke_backend(LlmBackend& backend, const PromptBundle& prompt,
                              const netsim::NetworkScenario& scenario) {
  const auto t0 = std::chrono::steady_clock::now();
  ReasoningTrace trace = backend.invoke(prompt, scenario);
  const auto t1 = std::chrono::steady_clock::now();
  trace.latency_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return trace;
}

std::vector<ExemplarRecord> build_auto_cot_exemplars(
    const std::vector<intent::IntentText>& questions, int k,
    LlmBackend& backend, intent::Embedder& embedder,
    const netsim::NetworkScenario& scenario, std::uint64_t seed) {
  if (static_cast<int>(questions.size()) < k)
    throw DomainError("need at least k questions to build k exemplars");

  std::vector<intent::IntentEmbedding> embs;
  embs.reserve(questions.size());
  for (const auto& q : questions)
    embs.push_back(intent::embed_intent(q, embedder));

  const auto clusters = intent::cluster_intents(embs, k, seed, 100);

  std::vector<ExemplarRecord> out;
  for (int c = 0; c < clusters.k; ++c) {
    int pick = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < questions.size(); ++i) {
      if (clusters.assignments[i] != c) continue;
      double d = 0.0;
      for (std::size_t j = 0; j < embs[i].vector.size(); ++j) {
        const double diff =
            embs[i].vector[j] -
            clusters.centroids[static_cast<std::size_t>(c)][j];
        d += diff * diff;
      }
      if (d < best_d) {
        best_d = d;
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) {
      std::fprintf(stderr, "warning: intent cluster %d is empty, skipped\n", c);
      continue;
    }

    const auto& q = questions[static_cast<std::size_t>(pick)];
    PromptBundle bundle;
    bundle.system_preamble = "You are a wireless network planning assistant.";
    bundle.scenario_summary = scenario_summary_text(scenario);
    bundle.task_instruction =
        "Question: " + q.text + "\n" + kZeroShotTrigger + ".";
    bundle.output_schema_instruction = schema_instruction_text();
    const ReasoningTrace trace = invoke_backend(backend, bundle, scenario);

    TaskTag tag = TaskTag::generic;
    try {
      tag = tag_for_objectives(intent::parse_intent(q, c).objectives);
    } catch (const UnrecognizedIntent&) {
      tag = TaskTag::generic;
    }

    ExemplarRecord ex;
    ex.question = q.text;
    ex.reasoning_chain = trace.steps;
    ex.answer = trace.final_block;
    ex.tag = tag;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace cotnet::cot
