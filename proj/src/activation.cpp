#include "cotnet/activation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cotnet/errors.hpp"

namespace cotnet::activation {

ActivationState make_state(int cluster, int user_count, double area_width_m,
                           double area_height_m, double comm_range_m,
                           double max_tx_power_dbm) {
  const double area_km2 = (area_width_m / 1000.0) * (area_height_m / 1000.0);
  ActivationState s;
  s.cluster = cluster;
  s.user_density = std::clamp(
      (static_cast<double>(user_count) / area_km2) / 100.0, 0.0, 1.0);
  s.range_norm = std::clamp((comm_range_m - 200.0) / 400.0, 0.0, 1.0);
  s.power_budget_norm = std::clamp(max_tx_power_dbm / 20.0, 0.0, 1.0);
  return s;
}

int feature_bin(double f) {
  return std::min(3, static_cast<int>(std::floor(f * 4.0)));
}

int state_id(const ActivationState& s) {
  return ((s.cluster * 4 + feature_bin(s.user_density)) * 4 +
          feature_bin(s.range_norm)) * 4 +
         feature_bin(s.power_budget_norm);
}

double QFunction::get(int sid, int action) const {
  const auto it = table.find(static_cast<std::int64_t>(sid) * n_actions + action);
  return it == table.end() ? 0.0 : it->second;
}

void QFunction::set(int sid, int action, double value) {
  table[static_cast<std::int64_t>(sid) * n_actions + action] = value;
}

int QFunction::argmax(int sid) const {
  int best = 0;
  double best_v = get(sid, 0);
  for (int a = 1; a < n_actions; ++a) {
    const double v = get(sid, a);
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

double QFunction::max_value(int sid) const {
  return get(sid, argmax(sid));
}

int select_module(const ActivationState& state, ActivationPolicy& policy) {
  if (policy.epsilon > 0.0 && policy.rng.uniform01() < policy.epsilon)
    return static_cast<int>(policy.rng.uniform_int(
        static_cast<std::uint32_t>(policy.q.n_actions)));
  return policy.q.argmax(state_id(state));
}

void update_q(QFunction& q, const RewardSample& sample, double lr,
              double gamma) {
  if (!(lr > 0.0 && lr <= 1.0)) throw DomainError("lr must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw DomainError("gamma must be in [0, 1)");
  const int sid = state_id(sample.state);
  const double old = q.get(sid, sample.action);
  const double target =
      sample.reward + gamma * q.max_value(state_id(sample.next_state));
  q.set(sid, sample.action, old + lr * (target - old));
}

ActivationPolicy train_activation(EpisodeOracle& env, const TrainParams& p) {
  if (p.episodes < 1) throw DomainError("episodes must be >= 1");
  ActivationPolicy policy(env.n_actions(), p.epsilon_start, p.seed);
  const double denom = p.episodes > 1 ? p.episodes - 1 : 1;
  for (int e = 0; e < p.episodes; ++e) {
    policy.epsilon =
        p.epsilon_start +
        (p.epsilon_end - p.epsilon_start) * (static_cast<double>(e) / denom);
    const ActivationState s = env.sample_state();
    const int a = select_module(s, policy);
    const double r = env.reward(s, a);
    update_q(policy.q, {s, a, r, s}, p.lr, p.gamma);
  }
  policy.epsilon = 0.0;
  return policy;
}

nlohmann::json policy_to_json(const ActivationPolicy& policy) {
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [key, value] : policy.q.table) {
    const std::int64_t sid = key / policy.q.n_actions;
    const std::int64_t action = key % policy.q.n_actions;
    q[std::to_string(sid) + ":" + std::to_string(action)] = value;
  }
  return {{"n_actions", policy.q.n_actions},
          {"bins", 4},
          {"seed", policy.seed},
          {"epsilon", policy.epsilon},
          {"q", q}};
}

ActivationPolicy policy_from_json(const nlohmann::json& j) {
  ActivationPolicy policy(j.at("n_actions").get<int>(),
                          j.at("epsilon").get<double>(),
                          j.at("seed").get<std::uint64_t>());
  for (const auto& [key, value] : j.at("q").items()) {
    const auto colon = key.find(':');
    if (colon == std::string::npos)
      throw ParseError("policy q key is not \"stateId:action\": " + key);
    const int sid = std::stoi(key.substr(0, colon));
    const int action = std::stoi(key.substr(colon + 1));
    policy.q.set(sid, action, value.get<double>());
  }
  return policy;
}

void save_policy(const ActivationPolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write policy file: " + path);
  out << policy_to_json(policy).dump(2) << "\n";
}

ActivationPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read policy file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("policy file is not JSON: ") + e.what());
  }
  return policy_from_json(j);
}

}  // namespace cotnet::activation
