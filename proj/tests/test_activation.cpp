#include <cstdio>
#include <vector>

#include <doctest.h>

#include "cotnet/activation.hpp"
#include "cotnet/errors.hpp"

using namespace cotnet;
using namespace cotnet::activation;

namespace {

// Stationary two-context bandit with known best arms; reward noise comes
// from its own deterministic stream.
class ToyOracle : public EpisodeOracle {
 public:
  explicit ToyOracle(std::uint64_t seed) : rng_(seed) {}

  int n_actions() const override { return 4; }

  ActivationState sample_state() override {
    ActivationState s;
    s.cluster = static_cast<int>(rng_.uniform_int(2));
    return s;
  }

  double reward(const ActivationState& state, int action) override {
    // Cluster 0 prefers action 2, cluster 1 prefers action 1.
    const double base[2][4] = {{0.2, 0.4, 0.9, 0.1}, {0.3, 0.8, 0.2, 0.4}};
    return base[state.cluster][action] + 0.05 * rng_.uniform01();
  }

 private:
  Splitmix64 rng_;
};

}  // namespace

TEST_SUITE("activation") {

TEST_CASE("feature bins quantize the unit interval into quarters") {
  CHECK(feature_bin(0.0) == 0);
  CHECK(feature_bin(0.24) == 0);
  CHECK(feature_bin(0.25) == 1);
  CHECK(feature_bin(0.5) == 2);
  CHECK(feature_bin(0.74) == 2);
  CHECK(feature_bin(0.75) == 3);
  CHECK(feature_bin(1.0) == 3);
}

TEST_CASE("state features are normalized and clamped") {
  const auto s = make_state(1, 10, 1000.0, 1000.0, 400.0, 20.0);
  CHECK(s.cluster == 1);
  // 10 users over 1 km^2 is 10 per km^2, over the 100 scale: 0.1.
  CHECK(s.user_density == doctest::Approx(0.1));
  CHECK(s.range_norm == doctest::Approx(0.5));
  CHECK(s.power_budget_norm == doctest::Approx(1.0));

  const auto hot = make_state(0, 100000, 100.0, 100.0, 900.0, 50.0);
  CHECK(hot.user_density == 1.0);
  CHECK(hot.range_norm == 1.0);
  CHECK(hot.power_budget_norm == 1.0);

  const auto cold = make_state(0, 1, 1000.0, 1000.0, 150.0, 20.0);
  CHECK(cold.range_norm == 0.0);
}

TEST_CASE("state ids separate clusters and bins") {
  const auto a = make_state(1, 10, 1000.0, 1000.0, 400.0, 20.0);
  // ((1*4 + bin(0.1))*4 + bin(0.5))*4 + bin(1.0) = ((4+0)*4+2)*4+3
  CHECK(state_id(a) == ((1 * 4 + 0) * 4 + 2) * 4 + 3);
  const auto b = make_state(2, 10, 1000.0, 1000.0, 400.0, 20.0);
  CHECK(state_id(b) != state_id(a));
  const auto c = make_state(1, 10, 1000.0, 1000.0, 200.0, 20.0);
  CHECK(state_id(c) != state_id(a));
}

TEST_CASE("sparse Q reads zero for unseen entries") {
  QFunction q;
  CHECK(q.get(17, 2) == 0.0);
  q.set(17, 2, 1.5);
  CHECK(q.get(17, 2) == 1.5);
  CHECK(q.get(17, 1) == 0.0);
  CHECK(q.max_value(17) == 1.5);
  CHECK(q.max_value(18) == 0.0);
}

TEST_CASE("argmax prefers the lowest action on ties") {
  QFunction q;
  CHECK(q.argmax(3) == 0);  // all zero: tie across all four actions
  q.set(3, 1, 2.0);
  q.set(3, 2, 2.0);
  CHECK(q.argmax(3) == 1);
  q.set(3, 3, 2.5);
  CHECK(q.argmax(3) == 3);
}

TEST_CASE("greedy selection does not consume randomness") {
  ActivationPolicy p(4, 0.0, 42);
  p.q.set(0, 2, 1.0);
  ActivationState s;
  CHECK(select_module(s, p) == 2);
  CHECK(select_module(s, p) == 2);
  // The stream is untouched: it still equals a fresh stream from the seed.
  Splitmix64 fresh(42);
  CHECK(p.rng.next() == fresh.next());
}

TEST_CASE("full exploration visits all arms uniformly") {
  ActivationPolicy p(4, 1.0, 7);
  ActivationState s;
  std::vector<int> counts(4, 0);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) ++counts[select_module(s, p)];
  for (int a = 0; a < 4; ++a) {
    const double freq = static_cast<double>(counts[a]) / draws;
    CHECK(freq == doctest::Approx(0.25).epsilon(0.08));
  }
}

TEST_CASE("bellman update moves toward the target") {
  QFunction q;
  RewardSample sample;
  sample.state.cluster = 0;
  sample.action = 1;
  sample.reward = 1.0;
  sample.next_state.cluster = 0;
  update_q(q, sample, 0.5, 0.0);
  CHECK(q.get(state_id(sample.state), 1) == doctest::Approx(0.5));
  update_q(q, sample, 0.5, 0.0);
  CHECK(q.get(state_id(sample.state), 1) == doctest::Approx(0.75));
}

TEST_CASE("discounted update bootstraps from the next state") {
  QFunction q;
  RewardSample sample;
  sample.state.cluster = 0;
  sample.action = 0;
  sample.reward = 1.0;
  sample.next_state.cluster = 1;
  q.set(state_id(sample.next_state), 3, 2.0);
  update_q(q, sample, 1.0, 0.5);
  // Target = 1.0 + 0.5 * 2.0 = 2.0, lr 1 jumps straight there.
  CHECK(q.get(state_id(sample.state), 0) == doctest::Approx(2.0));
}

TEST_CASE("hyperparameters outside their ranges are rejected") {
  QFunction q;
  RewardSample sample;
  CHECK_THROWS_AS(update_q(q, sample, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(update_q(q, sample, 1.5, 0.0), DomainError);
  CHECK_THROWS_AS(update_q(q, sample, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(update_q(q, sample, 0.5, -0.1), DomainError);
}

TEST_CASE("training identifies the best arm per context") {
  ToyOracle env(101);
  TrainParams params;
  params.episodes = 3000;
  const auto policy = train_activation(env, params);
  CHECK(policy.epsilon == 0.0);
  ActivationState c0, c1;
  c0.cluster = 0;
  c1.cluster = 1;
  CHECK(policy.q.argmax(state_id(c0)) == 2);
  CHECK(policy.q.argmax(state_id(c1)) == 1);
}

TEST_CASE("training is deterministic for a fixed env and seed") {
  ToyOracle env_a(55), env_b(55);
  TrainParams params;
  params.episodes = 500;
  const auto a = train_activation(env_a, params);
  const auto b = train_activation(env_b, params);
  CHECK(a.q.table == b.q.table);
}

TEST_CASE("policy json round-trips every field") {
  ActivationPolicy p(4, 0.25, 99);
  p.q.set(5, 1, 0.75);
  p.q.set(33, 0, -0.5);
  const auto j = policy_to_json(p);
  CHECK(j.at("bins") == 4);
  const auto back = policy_from_json(j);
  CHECK(back.q.table == p.q.table);
  CHECK(back.q.n_actions == 4);
  CHECK(back.epsilon == 0.25);
  CHECK(back.seed == 99);
}

TEST_CASE("policy files survive a save and load cycle") {
  ActivationPolicy p(4, 0.0, 3);
  p.q.set(12, 3, 1.25);
  const std::string path = "test_policy_roundtrip.json";
  save_policy(p, path);
  const auto back = load_policy(path);
  CHECK(back.q.table == p.q.table);
  std::remove(path.c_str());
}

TEST_CASE("malformed policy keys are parse errors") {
  nlohmann::json j = {{"n_actions", 4},
                      {"bins", 4},
                      {"seed", 0},
                      {"epsilon", 0.0},
                      {"q", {{"not-a-key", 1.0}}}};
  CHECK_THROWS_AS(policy_from_json(j), ParseError);
}

TEST_CASE("loading a missing policy file is a config error") {
  CHECK_THROWS_AS(load_policy("does_not_exist_policy.json"), ConfigError);
}

}  // TEST_SUITE("activation")
