#include "cotnet/cot.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cotnet/errors.hpp"

namespace cotnet::cot {

std::string to_string(TaskTag t) {
  switch (t) {
    case TaskTag::generic: return "generic";
    case TaskTag::deployment: return "deployment";
    case TaskTag::power_control: return "power_control";
    case TaskTag::joint: return "joint";
  }
  return "generic";
}

TaskTag task_tag_from_string(const std::string& s) {
  if (s == "deployment") return TaskTag::deployment;
  if (s == "power_control") return TaskTag::power_control;
  if (s == "joint") return TaskTag::joint;
  if (s == "generic") return TaskTag::generic;
  throw ParseError("unknown task tag: " + s);
}

std::vector<CotModuleSpec> default_modules() {
  std::vector<CotModuleSpec> mods(4);
  mods[0].id = 0;
  mods[0].task_tag = TaskTag::generic;
  mods[0].step_template = {"restate task", "propose solution"};

  mods[1].id = 1;
  mods[1].task_tag = TaskTag::deployment;
  mods[1].step_template = {"intent translation", "parameter extraction",
                           "problem formulation", "placement search",
                           "utility computation"};

  mods[2].id = 2;
  mods[2].task_tag = TaskTag::power_control;
  mods[2].step_template = {"intent translation", "parameter extraction",
                           "problem formulation", "power tuning",
                           "utility computation"};

  mods[3].id = 3;
  mods[3].task_tag = TaskTag::joint;
  mods[3].step_template = {"intent translation", "parameter extraction",
                           "problem formulation", "solving",
                           "utility computation"};
  return mods;
}

std::string render_prompt(const PromptBundle& p) {
  std::string out = p.system_preamble;
  auto append = [&out](const std::string& part) {
    if (part.empty()) return;
    if (!out.empty()) out += "\n\n";
    out += part;
  };
  append(p.exemplar_block);
  append(p.scenario_summary);
  append(p.task_instruction);
  append(p.output_schema_instruction);
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

PromptBundle compose_prompt(const CotModuleSpec& module,
                            const intent::ParsedIntent& parsed,
                            const netsim::NetworkScenario& scenario) {
  PromptBundle p;

  std::string objectives;
  for (auto o : parsed.objectives) {
    if (!objectives.empty()) objectives += ", ";
    objectives += intent::to_string(o);
  }
  p.system_preamble =
      "You are a wireless network planning assistant. The user intent is: \"" +
      parsed.raw.text + "\" (objectives: " + objectives + ").";
  if (!parsed.constraints.empty()) {
    p.system_preamble += " Constraints:";
    for (const auto& [name, value] : parsed.constraints)
      p.system_preamble += " " + name + "=" + format_double(value) + ";";
  }

  for (const auto& ex : module.exemplars) {
    p.exemplar_block += "Example question: " + ex.question + "\n";
    for (const auto& step : ex.reasoning_chain)
      p.exemplar_block += step + "\n";
    p.exemplar_block += "Example answer: " + ex.answer + "\n\n";
  }
  if (!p.exemplar_block.empty()) p.exemplar_block.pop_back();

  p.scenario_summary = scenario_summary_text(scenario);

  p.task_instruction = "Work through these stages in order:";
  for (std::size_t i = 0; i < module.step_template.size(); ++i) {
    p.task_instruction += " " + std::to_string(i + 1) + ". " +
                          module.step_template[i] + ";";
  }
  if (!p.task_instruction.empty() && p.task_instruction.back() == ';')
    p.task_instruction.back() = '.';
  if (module.exemplars.empty())
    p.task_instruction += std::string(" ") + kZeroShotTrigger + ".";

  p.output_schema_instruction = schema_instruction_text();
  return p;
}

std::string scenario_summary_text(const netsim::NetworkScenario& scenario) {
  const auto& ch = scenario.channel;
  return "Scenario: " + std::to_string(scenario.users.size()) +
         " users in a " + format_double(scenario.area_m.width) + " m x " +
         format_double(scenario.area_m.height) + " m area; " +
         std::to_string(scenario.uavs.size()) + " UAV(s) at altitude " +
         format_double(
             scenario.uavs.empty() ? 0.0 : scenario.uavs.front().position.z) +
         " m; carrier " + format_double(ch.carrier_freq_hz / 1e9) +
         " GHz; bandwidth " + format_double(ch.bandwidth_hz / 1e6) +
         " MHz; noise temperature " + format_double(ch.temperature_k) +
         " K; maximum transmit power " +
         format_double(scenario.max_tx_power_dbm) +
         " dBm; communication range " +
         format_double(scenario.uavs.empty()
                           ? 0.0
                           : scenario.uavs.front().comm_range_m) +
         " m.";
}

std::string schema_instruction_text() {
  return std::string("End your reply with a fenced block tagged `") +
         kStrategyFenceTag +
         "` containing exactly one JSON object of the form "
         R"({"uav_positions": [[x, y], ...], "tx_powers_dbm": [p, ...]})"
         " with positions in meters inside the area and powers in dBm within "
         "the cap.";
}

TaskTag tag_for_objectives(const std::set<intent::Objective>& objectives) {
  const bool coverage = objectives.count(intent::Objective::coverage) > 0;
  const bool rate = objectives.count(intent::Objective::sum_rate) > 0;
  const bool energy = objectives.count(intent::Objective::energy) > 0;
  if (coverage && rate) return TaskTag::joint;
  if (coverage) return TaskTag::deployment;
  if (energy || rate) return TaskTag::power_control;
  return TaskTag::generic;
}

ControlCommand extract_strategy(const ReasoningTrace& trace,
                                const netsim::NetworkScenario& scenario) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(trace.final_block);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("strategy block is not JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ParseError("strategy block is not a JSON object");

  ControlCommand cmd;

  if (!j.contains("uav_positions") || !j["uav_positions"].is_array())
    throw ValidationError("uav_positions", "missing or non-array uav_positions");
  for (const auto& pos : j["uav_positions"]) {
    if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() ||
        !pos[1].is_number())
      throw ValidationError("uav_positions", "position is not an [x, y] pair");
    const double x = pos[0].get<double>();
    const double y = pos[1].get<double>();
    if (!std::isfinite(x) || !std::isfinite(y))
      throw ValidationError("uav_positions", "position is not finite");
    if (x < 0.0 || x > scenario.area_m.width || y < 0.0 ||
        y > scenario.area_m.height)
      throw ValidationError("uav_positions",
                            "position (" + format_double(x) + ", " +
                                format_double(y) + ") is outside the area");
    cmd.uav_positions.push_back({x, y});
  }

  if (!j.contains("tx_powers_dbm") || !j["tx_powers_dbm"].is_array())
    throw ValidationError("tx_powers_dbm", "missing or non-array tx_powers_dbm");
  for (const auto& p : j["tx_powers_dbm"]) {
    if (!p.is_number())
      throw ValidationError("tx_powers_dbm", "power is not a number");
    const double v = p.get<double>();
    if (!std::isfinite(v))
      throw ValidationError("tx_powers_dbm", "power is not finite");
    if (v < 0.0 || v > scenario.max_tx_power_dbm)
      throw ValidationError("tx_powers_dbm",
                            "power " + format_double(v) +
                                " dBm is outside [0, " +
                                format_double(scenario.max_tx_power_dbm) + "]");
    cmd.tx_powers_dbm.push_back(v);
  }

  if (cmd.uav_positions.size() != cmd.tx_powers_dbm.size())
    throw ValidationError("tx_powers_dbm",
                          "power count does not match position count");
  if (cmd.uav_positions.size() != scenario.uavs.size())
    throw ValidationError("uav_positions",
                          "position count does not match UAV slot count");

  if (j.contains("assignments")) {
    if (!j["assignments"].is_object())
      throw ValidationError("assignments", "assignments is not an object");
    for (const auto& [key, value] : j["assignments"].items()) {
      int user_id = 0;
      try {
        user_id = std::stoi(key);
      } catch (const std::exception&) {
        throw ValidationError("assignments",
                              "assignment key is not a user id: " + key);
      }
      if (user_id < 0 || user_id >= static_cast<int>(scenario.users.size()))
        throw ValidationError("assignments",
                              "assignment for nonexistent user id " +
                                  std::to_string(user_id));
      if (!value.is_number_integer())
        throw ValidationError("assignments", "assignment value is not an index");
      const int uav = value.get<int>();
      if (uav < 0 || uav >= static_cast<int>(scenario.uavs.size()))
        throw ValidationError("assignments",
                              "assignment to nonexistent UAV index " +
                                  std::to_string(uav));
      cmd.assignments[user_id] = uav;
    }
  }
  return cmd;
}

std::string command_to_block(const ControlCommand& cmd) {
  nlohmann::ordered_json j;
  j["uav_positions"] = nlohmann::json::array();
  for (const auto& p : cmd.uav_positions)
    j["uav_positions"].push_back({p[0], p[1]});
  j["tx_powers_dbm"] = cmd.tx_powers_dbm;
  if (!cmd.assignments.empty()) {
    nlohmann::ordered_json a = nlohmann::ordered_json::object();
    for (const auto& [user, uav] : cmd.assignments)
      a[std::to_string(user)] = uav;
    j["assignments"] = a;
  }
  return j.dump();
}

std::string fenced_block(const std::string& payload) {
  return std::string("```") + kStrategyFenceTag + "\n" + payload + "\n```";
}

std::string extract_fenced_payload(const std::string& reply) {
  const std::string open = std::string("```") + kStrategyFenceTag;
  const auto start = reply.rfind(open);
  if (start == std::string::npos)
    throw MalformedReply("reply has no ```" + std::string(kStrategyFenceTag) +
                         " fenced block");
  auto payload_begin = reply.find('\n', start);
  if (payload_begin == std::string::npos)
    throw MalformedReply("strategy fence is not terminated");
  ++payload_begin;
  const auto end = reply.find("```", payload_begin);
  if (end == std::string::npos)
    throw MalformedReply("strategy fence is not terminated");
  std::string payload = reply.substr(payload_begin, end - payload_begin);
  while (!payload.empty() &&
         (payload.back() == '\n' || payload.back() == '\r'))
    payload.pop_back();
  return payload;
}

std::vector<std::string> split_steps(const std::string& prose) {
  static const std::regex numbered(R"(^\s*(?:step\s+)?\d+[.):]\s*)",
                                   std::regex::icase);
  std::vector<std::string> steps;
  std::string current;
  auto flush = [&] {
    while (!current.empty() &&
           (current.back() == ' ' || current.back() == '\n' ||
            current.back() == '\r'))
      current.pop_back();
    if (!current.empty()) steps.push_back(current);
    current.clear();
  };

  std::istringstream in(prose);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool blank =
        line.find_first_not_of(" \t") == std::string::npos;
    if (blank) {
      flush();
      continue;
    }
    if (std::regex_search(line, numbered)) flush();
    if (!current.empty()) current += '\n';
    current += line;
  }
  flush();
  return steps;
}

}  // namespace cotnet::cot
