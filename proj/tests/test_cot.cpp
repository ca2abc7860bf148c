#include <atomic>
#include <cmath>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotnet/backend.hpp"
#include "cotnet/cot.hpp"
#include "cotnet/errors.hpp"
#include "cotnet/optimizer.hpp"
#include "cotnet/physics.hpp"
#include "cotnet/scoring.hpp"

using namespace cotnet;
using namespace cotnet::cot;

namespace {

netsim::NetworkScenario demo_scenario(std::uint64_t seed = 42, int users = 10,
                                      double range_m = 400.0) {
  netsim::NetworkScenario s;
  s.users = netsim::generate_users(seed, users, s.area_m);
  netsim::UavNode uav;
  uav.id = 0;
  uav.position = {500.0, 500.0, 100.0};
  uav.tx_power_dbm = 20.0;
  uav.comm_range_m = range_m;
  s.uavs = {uav};
  netsim::validate_scenario(s);
  return s;
}

intent::ParsedIntent demo_intent() {
  intent::HashedBowEmbedder emb;
  (void)emb;
  return intent::parse_intent(
      {0,
       "Deploy a UAV base station that maximizes both coverage and user data "
       "rates."},
      2);
}

ReasoningTrace trace_with_block(const std::string& payload) {
  ReasoningTrace t;
  t.final_block = payload;
  return t;
}

std::string valid_payload() {
  ControlCommand cmd;
  cmd.uav_positions = {{250.0, 750.0}};
  cmd.tx_powers_dbm = {12.0};
  return command_to_block(cmd);
}

// Minimal OpenAI-style chat endpoint returning a canned reasoning reply.
struct ChatServer {
  httplib::Server svr;
  int port = 0;
  std::thread th;
  std::atomic<int> hits{0};
  nlohmann::json last_request;
  std::string last_auth;
  std::string content;
  int fail_first_n = 0;
  bool omit_choices = false;

  ChatServer() {
    content =
        "First I look at the service area and the users.\n\n"
        "Then I hover over the middle at moderate power.\n\n" +
        fenced_block(valid_payload());
    svr.Post("/v1/chat/completions",
             [this](const httplib::Request& req, httplib::Response& res) {
               const int n = ++hits;
               last_request = nlohmann::json::parse(req.body);
               last_auth = req.get_header_value("Authorization");
               if (n <= fail_first_n) {
                 res.status = 503;
                 return;
               }
               nlohmann::json reply;
               if (!omit_choices) {
                 reply["choices"] = {{{"message", {{"role", "assistant"},
                                                   {"content", content}}}}};
                 reply["usage"] = {{"prompt_tokens", 111},
                                   {"completion_tokens", 42}};
               } else {
                 reply["object"] = "chat.completion";
               }
               res.set_content(reply.dump(), "application/json");
             });
    port = svr.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }

  ~ChatServer() {
    svr.stop();
    th.join();
  }

  HttpChatConfig config() const {
    HttpChatConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.api_key = "test-key";
    cfg.model = "test-model";
    return cfg;
  }
};

}  // namespace

TEST_SUITE("cot") {

TEST_CASE("the four built-in modules carry their stage templates") {
  const auto mods = default_modules();
  REQUIRE(mods.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(mods[i].id == i);
  CHECK(mods[0].task_tag == TaskTag::generic);
  CHECK(mods[1].task_tag == TaskTag::deployment);
  CHECK(mods[2].task_tag == TaskTag::power_control);
  CHECK(mods[3].task_tag == TaskTag::joint);
  REQUIRE(mods[3].step_template.size() == 5);
  CHECK(mods[3].step_template[0] == "intent translation");
  CHECK(mods[3].step_template[3] == "solving");
  CHECK(mods[1].step_template[3] == "placement search");
  CHECK(mods[2].step_template[3] == "power tuning");
  for (const auto& m : mods) CHECK(m.exemplars.empty());
}

TEST_CASE("objectives map onto module tags") {
  using intent::Objective;
  CHECK(tag_for_objectives({Objective::coverage, Objective::sum_rate}) ==
        TaskTag::joint);
  CHECK(tag_for_objectives({Objective::coverage}) == TaskTag::deployment);
  CHECK(tag_for_objectives({Objective::energy}) == TaskTag::power_control);
  CHECK(tag_for_objectives({Objective::sum_rate}) == TaskTag::power_control);
  CHECK(tag_for_objectives({Objective::latency}) == TaskTag::generic);
  CHECK(tag_for_objectives({}) == TaskTag::generic);
}

TEST_CASE("task tags round-trip through their names") {
  for (TaskTag t : {TaskTag::generic, TaskTag::deployment,
                    TaskTag::power_control, TaskTag::joint})
    CHECK(task_tag_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(task_tag_from_string("bogus"), ParseError);
}

TEST_CASE("prompts without exemplars fall back to the zero-shot trigger") {
  const auto mods = default_modules();
  const auto p = compose_prompt(mods[3], demo_intent(), demo_scenario());
  CHECK(p.task_instruction.find(kZeroShotTrigger) != std::string::npos);
  CHECK(p.task_instruction.find("Work through these stages in order") !=
        std::string::npos);
  CHECK(p.task_instruction.find("intent translation") != std::string::npos);
  CHECK(p.exemplar_block.empty());
  CHECK(p.system_preamble.find("maximizes both coverage") != std::string::npos);
  CHECK(p.scenario_summary.find("maximum transmit power 20 dBm") !=
        std::string::npos);
  CHECK(p.output_schema_instruction == schema_instruction_text());
}

TEST_CASE("prompts quote attached exemplars verbatim") {
  auto mods = default_modules();
  ExemplarRecord ex;
  ex.question = "How should the rotor cell be placed?";
  ex.reasoning_chain = {"1. Check the users.", "2. Hover over them."};
  ex.answer = valid_payload();
  ex.tag = TaskTag::joint;
  mods[3].exemplars = {ex};
  const auto p = compose_prompt(mods[3], demo_intent(), demo_scenario());
  CHECK(p.exemplar_block.find(ex.question) != std::string::npos);
  CHECK(p.exemplar_block.find("2. Hover over them.") != std::string::npos);
  CHECK(p.task_instruction.find(kZeroShotTrigger) == std::string::npos);
}

TEST_CASE("the rendered prompt ends with the schema instruction") {
  const auto mods = default_modules();
  const auto p = compose_prompt(mods[0], demo_intent(), demo_scenario());
  const auto text = render_prompt(p);
  const auto schema = schema_instruction_text();
  REQUIRE(text.size() >= schema.size());
  CHECK(text.compare(text.size() - schema.size(), schema.size(), schema) == 0);
}

TEST_CASE("fenced payloads round-trip and the last fence wins") {
  const std::string payload = "{\"a\": 1}";
  CHECK(extract_fenced_payload(fenced_block(payload)) == payload);
  const std::string two = "prose\n" + fenced_block("{\"first\": 1}") +
                          "\nmore prose\n" + fenced_block(payload);
  CHECK(extract_fenced_payload(two) == payload);
}

TEST_CASE("replies without a complete strategy fence are malformed") {
  CHECK_THROWS_AS(extract_fenced_payload("no fence at all"), MalformedReply);
  CHECK_THROWS_AS(extract_fenced_payload("```strategy\n{\"a\": 1}"),
                  MalformedReply);
  CHECK_THROWS_AS(extract_fenced_payload("```python\nprint(1)\n```"),
                  MalformedReply);
}

TEST_CASE("prose splits into steps on numbering or blank lines") {
  const auto numbered = split_steps("1. First thing.\n2. Second thing.");
  REQUIRE(numbered.size() == 2);
  CHECK(numbered[0].find("First thing") != std::string::npos);

  const auto stepform = split_steps("Step 1: alpha\nStep 2: beta");
  CHECK(stepform.size() == 2);

  const auto paras = split_steps("First paragraph here.\n\nSecond one.");
  CHECK(paras.size() == 2);

  const auto single = split_steps("Just one unbroken thought.");
  REQUIRE(single.size() == 1);
  CHECK(single[0] == "Just one unbroken thought.");

  CHECK(split_steps("").empty());
}

TEST_CASE("commands round-trip through the strategy block") {
  ControlCommand cmd;
  cmd.uav_positions = {{250.0, 750.0}};
  cmd.tx_powers_dbm = {12.5};
  cmd.assignments = {{0, 0}, {3, 0}};
  const auto s = demo_scenario();
  const auto back =
      extract_strategy(trace_with_block(command_to_block(cmd)), s);
  CHECK(back.uav_positions == cmd.uav_positions);
  CHECK(back.tx_powers_dbm == cmd.tx_powers_dbm);
  CHECK(back.assignments == cmd.assignments);
}

TEST_CASE("the strategy block lists positions before powers") {
  const auto block = valid_payload();
  const auto i = block.find("uav_positions");
  const auto j = block.find("tx_powers_dbm");
  REQUIRE(i != std::string::npos);
  REQUIRE(j != std::string::npos);
  CHECK(i < j);
}

TEST_CASE("non-JSON strategy payloads are parse errors") {
  const auto s = demo_scenario();
  CHECK_THROWS_AS(extract_strategy(trace_with_block("not json"), s),
                  ParseError);
  CHECK_THROWS_AS(extract_strategy(trace_with_block("[1, 2, 3]"), s),
                  ParseError);
}

TEST_CASE("missing or malformed fields name themselves") {
  const auto s = demo_scenario();
  try {
    extract_strategy(
        trace_with_block("{\"tx_powers_dbm\": [10.0]}"), s);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "uav_positions");
  }
  try {
    extract_strategy(
        trace_with_block("{\"uav_positions\": [[500.0, 500.0]]}"), s);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "tx_powers_dbm");
  }
}

TEST_CASE("out-of-area and non-finite positions are rejected") {
  const auto s = demo_scenario();
  CHECK_THROWS_AS(
      extract_strategy(trace_with_block(
                           "{\"uav_positions\": [[1500.0, 500.0]], "
                           "\"tx_powers_dbm\": [10.0]}"),
                       s),
      ValidationError);
  CHECK_THROWS_AS(
      extract_strategy(trace_with_block(
                           "{\"uav_positions\": [[-0.5, 500.0]], "
                           "\"tx_powers_dbm\": [10.0]}"),
                       s),
      ValidationError);
  CHECK_THROWS_AS(
      extract_strategy(trace_with_block(
                           "{\"uav_positions\": [[null, 500.0]], "
                           "\"tx_powers_dbm\": [10.0]}"),
                       s),
      ValidationError);
}

TEST_CASE("powers above the cap are rejected, never clamped") {
  const auto s = demo_scenario();
  try {
    extract_strategy(trace_with_block(
                         "{\"uav_positions\": [[500.0, 500.0]], "
                         "\"tx_powers_dbm\": [20.0001]}"),
                     s);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "tx_powers_dbm");
  }
  CHECK_THROWS_AS(
      extract_strategy(trace_with_block(
                           "{\"uav_positions\": [[500.0, 500.0]], "
                           "\"tx_powers_dbm\": [-3.0]}"),
                       s),
      ValidationError);
  // Exactly at the cap is legal.
  CHECK_NOTHROW(
      extract_strategy(trace_with_block("{\"uav_positions\": [[500.0, "
                                        "500.0]], \"tx_powers_dbm\": [20.0]}"),
                       s));
}

TEST_CASE("slot-count mismatches are rejected") {
  const auto s = demo_scenario();  // one UAV slot
  CHECK_THROWS_AS(
      extract_strategy(
          trace_with_block("{\"uav_positions\": [[100.0, 100.0], [200.0, "
                           "200.0]], \"tx_powers_dbm\": [10.0, 10.0]}"),
          s),
      ValidationError);
  CHECK_THROWS_AS(
      extract_strategy(trace_with_block("{\"uav_positions\": [[100.0, "
                                        "100.0]], \"tx_powers_dbm\": []}"),
                       s),
      ValidationError);
}

TEST_CASE("assignments must reference real users and slots") {
  const auto s = demo_scenario(42, 3);
  const std::string good =
      "{\"uav_positions\": [[500.0, 500.0]], \"tx_powers_dbm\": [10.0], "
      "\"assignments\": {\"2\": 0}}";
  CHECK_NOTHROW(extract_strategy(trace_with_block(good), s));
  const std::string ghost_user =
      "{\"uav_positions\": [[500.0, 500.0]], \"tx_powers_dbm\": [10.0], "
      "\"assignments\": {\"9\": 0}}";
  const std::string ghost_slot =
      "{\"uav_positions\": [[500.0, 500.0]], \"tx_powers_dbm\": [10.0], "
      "\"assignments\": {\"1\": 4}}";
  for (const auto& payload : {ghost_user, ghost_slot}) {
    try {
      extract_strategy(trace_with_block(payload), s);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "assignments");
    }
  }
}

TEST_CASE("the mock CoT backend solves in the mode the prompt names") {
  const auto s = demo_scenario();
  const auto mods = default_modules();
  const auto parsed = demo_intent();
  MockCotBackend backend;

  SUBCASE("placement search stays on the coarse grid at max power") {
    const auto p = compose_prompt(mods[1], parsed, s);
    const auto t = backend.invoke(p, s);
    const auto cmd = extract_strategy(t, s);
    CHECK(std::fmod(cmd.uav_positions[0][0], 100.0) == 0.0);
    CHECK(std::fmod(cmd.uav_positions[0][1], 100.0) == 0.0);
    CHECK(cmd.tx_powers_dbm[0] == s.max_tx_power_dbm);
  }

  SUBCASE("power tuning stays at the center and sweeps power") {
    const auto p = compose_prompt(mods[2], parsed, s);
    const auto t = backend.invoke(p, s);
    const auto cmd = extract_strategy(t, s);
    CHECK(cmd.uav_positions[0][0] == 500.0);
    CHECK(cmd.uav_positions[0][1] == 500.0);
    CHECK(std::fmod(cmd.tx_powers_dbm[0], 2.0) == 0.0);
  }

  SUBCASE("solving runs the full two-phase optimizer") {
    const auto p = compose_prompt(mods[3], parsed, s);
    const auto t = backend.invoke(p, s);
    const auto cmd = extract_strategy(t, s);
    const auto d = opt::optimize_deployment(s, opt::OptimizerConfig{});
    CHECK(cmd.uav_positions[0][0] == d.uav_positions[0].x);
    CHECK(cmd.uav_positions[0][1] == d.uav_positions[0].y);
    CHECK(cmd.tx_powers_dbm == d.tx_powers_dbm);
  }

  SUBCASE("anything else hovers over the user centroid") {
    const auto p = compose_prompt(mods[0], parsed, s);
    const auto t = backend.invoke(p, s);
    const auto cmd = extract_strategy(t, s);
    const auto d = opt::centroid_baseline(s);
    CHECK(cmd.uav_positions[0][0] == d.uav_positions[0].x);
    CHECK(cmd.tx_powers_dbm[0] == s.max_tx_power_dbm);
    CHECK(t.steps.size() == 2);
  }
}

TEST_CASE("mock traces are numerically consistent and fully informative") {
  const auto s = demo_scenario();
  const auto mods = default_modules();
  MockCotBackend backend;
  for (int id : {0, 1, 2, 3}) {
    const auto p = compose_prompt(mods[id], demo_intent(), s);
    const auto t = backend.invoke(p, s);
    const auto cmd = extract_strategy(t, s);
    const auto applied =
        netsim::with_deployment(s, cmd.uav_positions, cmd.tx_powers_dbm);
    const auto metrics = netsim::evaluate_scenario(applied);
    const auto b = scoring::score_fitness(t, applied, cmd, metrics,
                                          mods[id].step_template);
    CHECK(b.consistency == 1.0);
    CHECK(b.informativeness == 1.0);
    CHECK(b.misleadingness == 0.0);
  }
}

TEST_CASE("mock backends are deterministic") {
  const auto s = demo_scenario();
  const auto mods = default_modules();
  MockCotBackend backend;
  const auto p = compose_prompt(mods[3], demo_intent(), s);
  const auto a = backend.invoke(p, s);
  const auto b = backend.invoke(p, s);
  CHECK(a.steps == b.steps);
  CHECK(a.final_block == b.final_block);
}

TEST_CASE("the non-CoT baseline answers without reasoning") {
  const auto s = demo_scenario();
  MockNonCotBackend backend;
  const auto t = backend.invoke(PromptBundle{}, s);
  CHECK(t.steps.empty());
  const auto cmd = extract_strategy(t, s);
  CHECK(cmd.uav_positions[0][0] == 500.0);
  CHECK(cmd.uav_positions[0][1] == 500.0);
  CHECK(cmd.tx_powers_dbm[0] == s.max_tx_power_dbm);
}

TEST_CASE("invoke_backend stamps identity and latency") {
  const auto s = demo_scenario();
  MockNonCotBackend backend;
  const auto t = invoke_backend(backend, PromptBundle{}, s);
  CHECK(t.backend_id == "mock-non-cot");
  CHECK(t.latency_ms >= 0.0);
}

TEST_CASE("the http chat backend speaks the wire protocol") {
  ChatServer server;
  HttpChatBackend backend(server.config());
  const auto s = demo_scenario();
  const auto mods = default_modules();
  const auto p = compose_prompt(mods[3], demo_intent(), s);
  const auto t = backend.invoke(p, s);

  CHECK(server.last_auth == "Bearer test-key");
  CHECK(server.last_request.at("model") == "test-model");
  CHECK(server.last_request.at("temperature").get<double>() == 0.0);
  const auto& messages = server.last_request.at("messages");
  REQUIRE(messages.size() == 2);
  CHECK(messages[0].at("role") == "system");
  CHECK(messages[1].at("role") == "user");
  CHECK(messages[1].at("content").get<std::string>().find(
            "Work through these stages") != std::string::npos);

  REQUIRE(t.steps.size() == 2);
  CHECK(t.steps[0].find("service area") != std::string::npos);
  CHECK(t.final_block == valid_payload());
  CHECK(t.prompt_tokens == 111);
  CHECK(t.completion_tokens == 42);
  CHECK(t.backend_id == "http:test-model");

  const auto cmd = extract_strategy(t, s);
  CHECK(cmd.uav_positions[0][0] == 250.0);
}

TEST_CASE("the http chat backend retries transient server errors") {
  ChatServer server;
  server.fail_first_n = 2;
  HttpChatBackend backend(server.config());
  const auto s = demo_scenario();
  const auto t = backend.invoke(PromptBundle{}, s);
  CHECK(server.hits.load() == 3);
  CHECK_FALSE(t.final_block.empty());
}

TEST_CASE("persistent http failures become transport errors") {
  ChatServer server;
  server.fail_first_n = 1000;
  HttpChatBackend backend(server.config());
  const auto s = demo_scenario();
  CHECK_THROWS_AS(backend.invoke(PromptBundle{}, s), TransportError);
  CHECK(server.hits.load() == 3);
}

TEST_CASE("an unreachable endpoint is a transport error") {
  HttpChatConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";  // discard port, nothing listens
  cfg.timeout_s = 1;
  HttpChatBackend backend(cfg);
  const auto s = demo_scenario();
  CHECK_THROWS_AS(backend.invoke(PromptBundle{}, s), TransportError);
}

TEST_CASE("replies missing the choices array are malformed") {
  ChatServer server;
  server.omit_choices = true;
  HttpChatBackend backend(server.config());
  const auto s = demo_scenario();
  CHECK_THROWS_AS(backend.invoke(PromptBundle{}, s), MalformedReply);
}

TEST_CASE("auto-cot builds one exemplar per cluster") {
  const auto s = demo_scenario();
  intent::HashedBowEmbedder emb;
  MockCotBackend backend;
  const std::vector<intent::IntentText> questions = {
      {0, "Maximize the coverage of ground users in the area."},
      {1, "Improve coverage for the whole service region."},
      {2, "Reduce the energy consumption of the base station."},
      {3, "Lower the power consumption of the aerial cell."}};
  const auto exemplars =
      cot::build_auto_cot_exemplars(questions, 2, backend, emb, s, 3);
  REQUIRE(exemplars.size() == 2);
  for (const auto& ex : exemplars) {
    CHECK_FALSE(ex.question.empty());
    CHECK_FALSE(ex.reasoning_chain.empty());
    CHECK_FALSE(ex.answer.empty());
    CHECK_NOTHROW(extract_strategy(trace_with_block(ex.answer), s));
  }
  const auto again =
      cot::build_auto_cot_exemplars(questions, 2, backend, emb, s, 3);
  CHECK(again.size() == exemplars.size());
  CHECK(again[0].question == exemplars[0].question);

  CHECK_THROWS_AS(cot::build_auto_cot_exemplars({questions[0]}, 2, backend,
                                                emb, s, 3),
                  DomainError);
}

}  // TEST_SUITE("cot")
