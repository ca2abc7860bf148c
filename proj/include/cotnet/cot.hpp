#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cotnet/intent.hpp"
#include "cotnet/scenario.hpp"

namespace cotnet::cot {

// Zero-shot trigger phrase appended when a module carries no exemplars.
inline constexpr const char* kZeroShotTrigger = "Let's think step by step";

// Tag of the ```strategy fenced block every backend must end its reply with.
inline constexpr const char* kStrategyFenceTag = "strategy";

enum class TaskTag { generic, deployment, power_control, joint };

std::string to_string(TaskTag t);
TaskTag task_tag_from_string(const std::string& s);

// One few-shot example: a problem, its reasoning steps, and the answer.
struct ExemplarRecord {
  std::string question;
  std::vector<std::string> reasoning_chain;
  std::string answer;
  TaskTag tag = TaskTag::generic;
};

// A reasoning module: exemplar store plus the ordered stage names the LLM is
// instructed to walk through.
struct CotModuleSpec {
  int id = 0;
  TaskTag task_tag = TaskTag::generic;
  std::vector<ExemplarRecord> exemplars;
  std::vector<std::string> step_template;
};

// The four built-in modules, indexed by id:
//   0 generic, 1 deployment, 2 power_control, 3 joint.
// The joint module's step template is the five-stage deployment walkthrough
// (intent translation, parameter extraction, problem formulation, solving,
// utility computation).
std::vector<CotModuleSpec> default_modules();

struct PromptBundle {
  std::string system_preamble;
  std::string exemplar_block;
  std::string scenario_summary;
  std::string task_instruction;
  std::string output_schema_instruction;
};

// Joins the bundle sections; always ends with the schema instruction.
std::string render_prompt(const PromptBundle& p);

struct ReasoningTrace {
  std::vector<std::string> steps;  // empty only for non-CoT baselines
  std::string final_block;         // payload of the ```strategy fence
  std::string backend_id;
  std::optional<int> prompt_tokens;
  std::optional<int> completion_tokens;
  double latency_ms = 0.0;
};

// Validated, executable deployment decision. Altitude comes from the
// scenario's UAV slots, so positions are ground coordinates.
struct ControlCommand {
  std::vector<std::array<double, 2>> uav_positions;
  std::vector<double> tx_powers_dbm;
  std::map<int, int> assignments;  // optional user id -> uav index
};

PromptBundle compose_prompt(const CotModuleSpec& module,
                            const intent::ParsedIntent& parsed,
                            const netsim::NetworkScenario& scenario);

// One-line scenario recap (user count, area, channel, power cap, range)
// shared by compose_prompt and exemplar generation.
std::string scenario_summary_text(const netsim::NetworkScenario& scenario);

// The structured-output demand appended to every prompt.
std::string schema_instruction_text();

// Maps parsed objectives onto the module task tag: coverage with a rate goal
// goes to joint, coverage alone to deployment, energy or rate tuning to
// power_control, anything else to generic.
TaskTag tag_for_objectives(const std::set<intent::Objective>& objectives);

// Parses trace.final_block as a ControlCommand JSON object and validates it
// against the scenario. Violations throw (ParseError / ValidationError);
// powers above the cap are never clamped.
ControlCommand extract_strategy(const ReasoningTrace& trace,
                                const netsim::NetworkScenario& scenario);

// Renders a command as the JSON payload of a strategy block (the exact text a
// well-behaved backend would emit between the fences).
std::string command_to_block(const ControlCommand& cmd);

// Wraps a payload in the ```strategy fence.
std::string fenced_block(const std::string& payload);

// Payload of the last ```strategy fence in a reply; throws MalformedReply if
// there is none.
std::string extract_fenced_payload(const std::string& reply);

// Splits free prose into reasoning steps: numbered lines start new steps,
// otherwise blank-line separation; unsplittable text becomes a single step.
std::vector<std::string> split_steps(const std::string& prose);

}  // namespace cotnet::cot
