#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "cotnet/splitmix64.hpp"

namespace cotnet::activation {

// Context for one module-selection decision: intent cluster plus normalized
// system features, each clamped to [0,1].
struct ActivationState {
  int cluster = 0;
  double user_density = 0.0;      // users per km^2 / 100
  double range_norm = 0.0;        // (comm range - 200) / 400
  double power_budget_norm = 0.0; // max tx power / 20 dBm
};

ActivationState make_state(int cluster, int user_count, double area_width_m,
                           double area_height_m, double comm_range_m,
                           double max_tx_power_dbm);

// Each feature quantized into 4 bins: min(3, floor(f*4)).
int feature_bin(double f);

// ((cluster*4 + bin(density))*4 + bin(range))*4 + bin(power)
int state_id(const ActivationState& s);

// Sparse tabular Q: missing entries read as 0.
struct QFunction {
  std::map<std::int64_t, double> table;  // key = state_id * n_actions + action
  int n_actions = 4;

  double get(int sid, int action) const;
  void set(int sid, int action, double value);
  int argmax(int sid) const;     // lowest index on ties
  double max_value(int sid) const;
};

struct ActivationPolicy {
  QFunction q;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  Splitmix64 rng{0};

  explicit ActivationPolicy(int n_actions = 4, double eps = 0.0,
                            std::uint64_t seed_value = 0)
      : epsilon(eps), seed(seed_value), rng(seed_value) {
    q.n_actions = n_actions;
  }
};

struct RewardSample {
  ActivationState state;
  int action = 0;
  double reward = 0.0;           // Q_total of the executed episode
  ActivationState next_state;
};

// Epsilon-greedy over the policy's own PRNG stream: with probability epsilon
// a uniform action, otherwise argmax with lowest-index tie-break.
int select_module(const ActivationState& state, ActivationPolicy& policy);

// Q(s,a) += lr * (r + gamma * max_a' Q(s',a') - Q(s,a)).
// Throws DomainError unless 0 < lr <= 1 and 0 <= gamma < 1.
void update_q(QFunction& q, const RewardSample& sample, double lr,
              double gamma);

// One training episode = one module choice scored by Q_total, so episodes
// are single-step contextual bandits and gamma defaults to 0.
class EpisodeOracle {
 public:
  virtual ~EpisodeOracle() = default;
  virtual int n_actions() const = 0;
  virtual ActivationState sample_state() = 0;
  virtual double reward(const ActivationState& state, int action) = 0;
};

struct TrainParams {
  int episodes = 5000;
  double lr = 0.1;
  double gamma = 0.0;
  double epsilon_start = 1.0;  // decays linearly to epsilon_end
  double epsilon_end = 0.05;
  std::uint64_t seed = 7;
};

// Runs the episode loop and returns the greedy (epsilon = 0) policy.
// (env seed, params.seed, hyperparams) fully determine the result.
ActivationPolicy train_activation(EpisodeOracle& env, const TrainParams& p);

// JSON shape: {"n_actions","bins","seed","epsilon","q":{"sid:action": value}}
nlohmann::json policy_to_json(const ActivationPolicy& policy);
ActivationPolicy policy_from_json(const nlohmann::json& j);
void save_policy(const ActivationPolicy& policy, const std::string& path);
ActivationPolicy load_policy(const std::string& path);

}  // namespace cotnet::activation
