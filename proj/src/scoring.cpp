#include "cotnet/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <regex>

#include "cotnet/physics.hpp"

namespace cotnet::scoring {

namespace {

constexpr const char* kNum = R"([-+]?[0-9]+(?:\.[0-9]+)?(?:[eE][-+]?[0-9]+)?)";

const std::regex& distance_re() {
  static const std::regex re(
      std::string("distance to user ([0-9]+) is (") + kNum + ")\\s?m\\b",
      std::regex::icase);
  return re;
}

const std::regex& power_re() {
  static const std::regex re(
      std::string("(max(?:imum)?\\s)?transmit power\\s(?:is\\s|set to\\s|of\\s)?(") +
          kNum + ")\\s?dbm",
      std::regex::icase);
  return re;
}

const std::regex& sum_rate_re() {
  static const std::regex re(
      std::string("sum rate\\s(?:is\\s|of\\s)?(") + kNum + ")\\s?mbps",
      std::regex::icase);
  return re;
}

const std::regex& user_rate_re() {
  static const std::regex re(
      std::string("rate for user ([0-9]+) is (") + kNum + ")\\s?mbps",
      std::regex::icase);
  return re;
}

const std::regex& coverage_re() {
  static const std::regex re(
      std::string("coverage ratio\\s(?:is\\s|of\\s)?(") + kNum + ")",
      std::regex::icase);
  return re;
}

const std::regex& position_re() {
  static const std::regex re(
      std::string("position \\((") + kNum + "),\\s?(" + kNum + ")\\)",
      std::regex::icase);
  return re;
}

double to_double(const std::ssub_match& m) { return std::strtod(m.str().c_str(), nullptr); }

void scan(const std::string& step, const std::regex& re,
          const std::function<void(const std::smatch&)>& emit) {
  auto begin = std::sregex_iterator(step.begin(), step.end(), re);
  for (auto it = begin; it != std::sregex_iterator(); ++it) emit(*it);
}

bool rel_match(double claimed, double actual) {
  return std::abs(claimed - actual) <= 0.05 * std::abs(actual) + 1e-6;
}

int user_index(const netsim::NetworkScenario& s, int user_id) {
  for (std::size_t i = 0; i < s.users.size(); ++i)
    if (s.users[i].id == user_id) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::vector<Claim> extract_claims(const std::string& step) {
  std::vector<Claim> claims;
  scan(step, distance_re(), [&](const std::smatch& m) {
    claims.push_back({Claim::Kind::distance, to_double(m[2]), 0.0,
                      std::atoi(m[1].str().c_str())});
  });
  scan(step, power_re(), [&](const std::smatch& m) {
    const auto kind =
        m[1].matched ? Claim::Kind::power_cap : Claim::Kind::power;
    claims.push_back({kind, to_double(m[2]), 0.0, -1});
  });
  scan(step, sum_rate_re(), [&](const std::smatch& m) {
    claims.push_back({Claim::Kind::sum_rate, to_double(m[1]), 0.0, -1});
  });
  scan(step, user_rate_re(), [&](const std::smatch& m) {
    claims.push_back({Claim::Kind::user_rate, to_double(m[2]), 0.0,
                      std::atoi(m[1].str().c_str())});
  });
  scan(step, coverage_re(), [&](const std::smatch& m) {
    claims.push_back({Claim::Kind::coverage, to_double(m[1]), 0.0, -1});
  });
  scan(step, position_re(), [&](const std::smatch& m) {
    claims.push_back(
        {Claim::Kind::position, to_double(m[1]), to_double(m[2]), -1});
  });
  return claims;
}

double reference_rate_bps(const netsim::NetworkScenario& s) {
  const double altitude = s.uavs.empty() ? 100.0 : s.uavs.front().position.z;
  const double rx_dbm =
      s.max_tx_power_dbm - netsim::fspl_db(altitude, s.channel.carrier_freq_hz);
  const double noise_dbm =
      netsim::noise_power_dbm(s.channel.bandwidth_hz, s.channel.temperature_k,
                              s.channel.boltzmann_j_per_k);
  return netsim::link_rate_bps(rx_dbm - noise_dbm, s.channel.bandwidth_hz);
}

namespace {

bool claim_consistent(const Claim& c, const netsim::NetworkScenario& scenario,
                      const cot::ControlCommand& command,
                      const netsim::NetworkMetrics& metrics) {
  switch (c.kind) {
    case Claim::Kind::distance: {
      const int idx = user_index(scenario, c.user_id);
      if (idx < 0) return false;
      for (std::size_t u = 0; u < command.uav_positions.size(); ++u) {
        const double z = u < scenario.uavs.size()
                             ? scenario.uavs[u].position.z
                             : (scenario.uavs.empty()
                                    ? 0.0
                                    : scenario.uavs.front().position.z);
        const netsim::Position3D p{command.uav_positions[u][0],
                                   command.uav_positions[u][1], z};
        if (rel_match(c.value, netsim::distance(scenario.users[idx].position, p)))
          return true;
      }
      return false;
    }
    case Claim::Kind::power:
      return std::any_of(command.tx_powers_dbm.begin(),
                         command.tx_powers_dbm.end(),
                         [&](double p) { return rel_match(c.value, p); });
    case Claim::Kind::power_cap:
      return rel_match(c.value, scenario.max_tx_power_dbm);
    case Claim::Kind::sum_rate:
      return rel_match(c.value, metrics.sum_rate_bps / 1e6);
    case Claim::Kind::user_rate: {
      const int idx = user_index(scenario, c.user_id);
      if (idx < 0 || idx >= static_cast<int>(metrics.per_user_rate_bps.size()))
        return false;
      return rel_match(c.value, metrics.per_user_rate_bps[idx] / 1e6);
    }
    case Claim::Kind::coverage:
      return rel_match(c.value, metrics.coverage_ratio);
    case Claim::Kind::position:
      for (const auto& xy : command.uav_positions) {
        const bool ok_x =
            std::abs(c.value - xy[0]) <= 0.05 * scenario.area_m.width + 1e-6;
        const bool ok_y =
            std::abs(c.value2 - xy[1]) <= 0.05 * scenario.area_m.height + 1e-6;
        if (ok_x && ok_y) return true;
      }
      return false;
  }
  return false;
}

bool claim_misleading(const Claim& c, const netsim::NetworkScenario& scenario) {
  switch (c.kind) {
    case Claim::Kind::power:
    case Claim::Kind::power_cap:
      return c.value > scenario.max_tx_power_dbm + 1e-9;
    case Claim::Kind::position:
      return c.value < 0.0 || c.value > scenario.area_m.width ||
             c.value2 < 0.0 || c.value2 > scenario.area_m.height;
    default:
      return false;
  }
}

}  // namespace

FitnessBreakdown score_fitness(const cot::ReasoningTrace& trace,
                               const netsim::NetworkScenario& scenario,
                               const cot::ControlCommand& command,
                               const netsim::NetworkMetrics& metrics,
                               std::span<const std::string> step_template) {
  FitnessBreakdown out;

  std::size_t total = 0, consistent = 0, misleading = 0;
  for (const auto& step : trace.steps) {
    for (const Claim& c : extract_claims(step)) {
      ++total;
      if (claim_consistent(c, scenario, command, metrics)) ++consistent;
      if (claim_misleading(c, scenario)) ++misleading;
    }
  }
  out.consistency =
      total == 0 ? 1.0 : static_cast<double>(consistent) / total;
  out.misleadingness =
      total == 0 ? 0.0 : static_cast<double>(misleading) / total;

  if (step_template.empty()) {
    out.informativeness = 1.0;
  } else {
    auto lowered = [](std::string s) {
      std::transform(s.begin(), s.end(), s.begin(),
                     [](unsigned char ch) { return std::tolower(ch); });
      return s;
    };
    std::vector<std::string> steps_lower;
    steps_lower.reserve(trace.steps.size());
    for (const auto& s : trace.steps) steps_lower.push_back(lowered(s));
    std::size_t matched = 0;
    for (const auto& stage : step_template) {
      const std::string needle = lowered(stage);
      const bool hit = std::any_of(
          steps_lower.begin(), steps_lower.end(), [&](const std::string& s) {
            return s.find(needle) != std::string::npos;
          });
      if (hit) ++matched;
    }
    out.informativeness =
        static_cast<double>(matched) / static_cast<double>(step_template.size());
  }
  return out;
}

double q_llm(const FitnessBreakdown& b) {
  return (b.consistency + b.informativeness + (1.0 - b.misleadingness)) / 3.0;
}

std::pair<double, double> q_wireless(const netsim::NetworkMetrics& m,
                                     const netsim::NetworkScenario& s) {
  const double r_ref = reference_rate_bps(s);
  double q_r = r_ref > 0.0 ? m.sum_rate_bps / r_ref : 0.0;
  q_r = std::clamp(q_r, 0.0, 1.0);
  return {m.coverage_ratio, q_r};
}

UtilityReport composite_utility(const UtilityWeights& w, double q_llm_value,
                                double q_c, double q_r) {
  UtilityReport r;
  r.weights = w;
  r.q_llm = q_llm_value;
  r.q_c = q_c;
  r.q_r = q_r;
  r.q_wireless = q_c + q_r;
  r.q_total = w.alpha * q_llm_value + w.beta * r.q_wireless;
  return r;
}

}  // namespace cotnet::scoring
