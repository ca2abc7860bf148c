#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cotnet/cot.hpp"
#include "cotnet/scenario.hpp"

namespace cotnet::scoring {

struct FitnessBreakdown {
  double consistency = 1.0;     // claims matching recomputation
  double informativeness = 0.0; // template stages covered by steps
  double misleadingness = 0.0;  // claims violating hard constraints
};

struct UtilityWeights {
  double alpha = 0.1;
  double beta = 0.45;
};

struct UtilityReport {
  double q_llm = 0.0;
  double q_c = 0.0;
  double q_r = 0.0;
  double q_wireless = 0.0;  // q_c + q_r
  double q_total = 0.0;     // alpha*q_llm + beta*q_wireless
  UtilityWeights weights;
};

// A numeric claim recognized inside a reasoning step.
struct Claim {
  enum class Kind {
    distance,   // "distance to user 3 is 241.2 m"
    power,      // "transmit power 18.0 dBm"
    power_cap,  // "maximum transmit power 20 dBm"
    sum_rate,   // "sum rate is 312.4 Mbps"
    user_rate,  // "rate for user 3 is 27.1 Mbps"
    coverage,   // "coverage ratio is 0.800"
    position,   // "position (512.5, 430.0)"
  };
  Kind kind;
  double value = 0.0;   // main numeric payload (or x for position)
  double value2 = 0.0;  // y for position
  int user_id = -1;     // for distance / user_rate
};

std::vector<Claim> extract_claims(const std::string& step);

// Nadir reference rate: full-bandwidth Shannon rate of a user directly below
// a UAV at max power with no interference. Normalizes Q_R.
double reference_rate_bps(const netsim::NetworkScenario& s);

// Trace quality against the executed command and recomputed physics:
//   consistency     fraction of claims matching recomputation within 5%
//                   relative tolerance (1.0 when there are no claims)
//   informativeness fraction of step_template stages named by >= 1 step
//                   (case-insensitive substring; 1.0 for an empty template)
//   misleadingness  fraction of claims breaking hard constraints (power cap,
//                   area bounds)
FitnessBreakdown score_fitness(const cot::ReasoningTrace& trace,
                               const netsim::NetworkScenario& scenario,
                               const cot::ControlCommand& command,
                               const netsim::NetworkMetrics& metrics,
                               std::span<const std::string> step_template);

// (consistency + informativeness + (1 - misleadingness)) / 3
double q_llm(const FitnessBreakdown& b);

// (q_c, q_r): coverage ratio and sum rate normalized by the nadir reference
// rate, q_r clamped to [0, 1].
std::pair<double, double> q_wireless(const netsim::NetworkMetrics& m,
                                     const netsim::NetworkScenario& s);

// Q_total = alpha*Q_LLM + beta*(Q_c + Q_R)
UtilityReport composite_utility(const UtilityWeights& w, double q_llm_value,
                                double q_c, double q_r);

}  // namespace cotnet::scoring
