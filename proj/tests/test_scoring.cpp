#include <doctest.h>

#include "cotnet/physics.hpp"
#include "cotnet/scoring.hpp"

using namespace cotnet;
using namespace cotnet::scoring;

namespace {

netsim::NetworkScenario nadir_scenario() {
  netsim::NetworkScenario s;
  s.users = {{0, {500.0, 500.0, 0.0}}};
  netsim::UavNode uav;
  uav.id = 0;
  uav.position = {500.0, 500.0, 100.0};
  uav.tx_power_dbm = 20.0;
  uav.comm_range_m = 400.0;
  s.uavs = {uav};
  return s;
}

cot::ControlCommand nadir_command() {
  cot::ControlCommand c;
  c.uav_positions = {{500.0, 500.0}};
  c.tx_powers_dbm = {20.0};
  return c;
}

FitnessBreakdown score_steps(const std::vector<std::string>& steps,
                             const std::vector<std::string>& tmpl = {}) {
  const auto s = nadir_scenario();
  const auto cmd = nadir_command();
  const auto m = netsim::evaluate_scenario(s);
  cot::ReasoningTrace trace;
  trace.steps = steps;
  return score_fitness(trace, s, cmd, m, tmpl);
}

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("claims are recognized with their kinds and payloads") {
  const auto claims = extract_claims(
      "The distance to user 3 is 241.2 m; transmit power 18 dBm with "
      "maximum transmit power 20 dBm. Sum rate is 312.4 Mbps, rate for "
      "user 3 is 27.1 Mbps, coverage ratio is 0.8, position (512.5, 430.0).");
  REQUIRE(claims.size() == 7);
  CHECK(claims[0].kind == Claim::Kind::distance);
  CHECK(claims[0].user_id == 3);
  CHECK(claims[0].value == doctest::Approx(241.2));
  CHECK(claims[1].kind == Claim::Kind::power);
  CHECK(claims[1].value == doctest::Approx(18.0));
  CHECK(claims[2].kind == Claim::Kind::power_cap);
  CHECK(claims[2].value == doctest::Approx(20.0));
  CHECK(claims[3].kind == Claim::Kind::sum_rate);
  CHECK(claims[3].value == doctest::Approx(312.4));
  CHECK(claims[4].kind == Claim::Kind::user_rate);
  CHECK(claims[4].user_id == 3);
  CHECK(claims[4].value == doctest::Approx(27.1));
  CHECK(claims[5].kind == Claim::Kind::coverage);
  CHECK(claims[5].value == doctest::Approx(0.8));
  CHECK(claims[6].kind == Claim::Kind::position);
  CHECK(claims[6].value == doctest::Approx(512.5));
  CHECK(claims[6].value2 == doctest::Approx(430.0));
}

TEST_CASE("scientific notation and case variations are accepted") {
  const auto claims = extract_claims("SUM RATE IS 2.718216e2 MBPS");
  REQUIRE(claims.size() == 1);
  CHECK(claims[0].kind == Claim::Kind::sum_rate);
  CHECK(claims[0].value == doctest::Approx(271.8216));
}

TEST_CASE("a fully correct trace scores perfect consistency") {
  const auto b = score_steps(
      {"1. The distance to user 0 is 100 m at position (500.0, 500.0).",
       "2. Using transmit power 20 dBm under maximum transmit power 20 dBm.",
       "3. Sum rate is 271.82 Mbps, coverage ratio is 1.0, and the rate for "
       "user 0 is 271.8 Mbps."});
  CHECK(b.consistency == 1.0);
  CHECK(b.misleadingness == 0.0);
}

TEST_CASE("claims outside the 5 percent band break consistency") {
  const auto b = score_steps({"Sum rate is 100.0 Mbps.",
                              "Coverage ratio is 1.0."});
  CHECK(b.consistency == doctest::Approx(0.5));
  CHECK(b.misleadingness == 0.0);
}

TEST_CASE("distance claims compare against the executed positions") {
  // Command puts the UAV at (500,500,100); user 0 is right below.
  auto good = score_steps({"distance to user 0 is 100 m"});
  CHECK(good.consistency == 1.0);
  auto bad = score_steps({"distance to user 0 is 300 m"});
  CHECK(bad.consistency == 0.0);
  // Unknown user id cannot be verified and counts against consistency.
  auto ghost = score_steps({"distance to user 7 is 100 m"});
  CHECK(ghost.consistency == 0.0);
  CHECK(ghost.misleadingness == 0.0);
}

TEST_CASE("a power claim above the cap is misleading") {
  const auto b = score_steps({"Set transmit power 25 dBm."});
  CHECK(b.consistency == 0.0);  // executed power is 20 dBm
  CHECK(b.misleadingness == 1.0);
}

TEST_CASE("a position claim outside the area is misleading") {
  const auto b = score_steps({"Fly to position (1200.0, 500.0)."});
  CHECK(b.consistency == 0.0);
  CHECK(b.misleadingness == 1.0);
}

TEST_CASE("traces without numeric claims are vacuously consistent") {
  const auto b = score_steps({"Think about the task.", "Decide carefully."});
  CHECK(b.consistency == 1.0);
  CHECK(b.misleadingness == 0.0);
}

TEST_CASE("informativeness counts template stages named in the steps") {
  const std::vector<std::string> tmpl = {"intent translation",
                                         "parameter extraction",
                                         "problem formulation"};
  const auto b = score_steps(
      {"1. Intent translation: coverage plus rate.",
       "2. PARAMETER EXTRACTION: one user, one UAV."},
      tmpl);
  CHECK(b.informativeness == doctest::Approx(2.0 / 3.0));
  const auto empty_tmpl = score_steps({"anything"}, {});
  CHECK(empty_tmpl.informativeness == 1.0);
}

TEST_CASE("an empty trace keeps vacuous consistency and zero coverage of the "
          "template") {
  const auto b = score_steps({}, {"intent translation"});
  CHECK(b.consistency == 1.0);
  CHECK(b.informativeness == 0.0);
  CHECK(b.misleadingness == 0.0);
  CHECK(q_llm(b) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("q_llm averages the three fitness facets") {
  FitnessBreakdown b;
  b.consistency = 0.5;
  b.informativeness = 0.25;
  b.misleadingness = 0.25;
  CHECK(q_llm(b) == doctest::Approx((0.5 + 0.25 + 0.75) / 3.0));
}

TEST_CASE("q_wireless returns coverage and the normalized rate") {
  const auto s = nadir_scenario();
  const auto m = netsim::evaluate_scenario(s);
  const auto [q_c, q_r] = q_wireless(m, s);
  CHECK(q_c == 1.0);
  // One user at nadir at max power is exactly the reference rate.
  CHECK(q_r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(reference_rate_bps(s) == doctest::Approx(271821623.885).epsilon(1e-6));
}

TEST_CASE("q_r is clamped to the unit interval") {
  auto s = nadir_scenario();
  // Two users stacked at nadir each get half the bandwidth; the mean rate
  // ratio stays 1 and never exceeds it.
  s.users.push_back({1, {500.0, 500.0, 0.0}});
  const auto m = netsim::evaluate_scenario(s);
  const auto [q_c, q_r] = q_wireless(m, s);
  CHECK(q_c == 1.0);
  CHECK(q_r <= 1.0);
  CHECK(q_r >= 0.0);
}

TEST_CASE("zero dBm transmit power still carries a positive rate") {
  auto s = nadir_scenario();
  s.uavs[0].tx_power_dbm = 0.0;
  const auto m = netsim::evaluate_scenario(s);
  CHECK(m.sum_rate_bps > 0.0);
  const auto [q_c, q_r] = q_wireless(m, s);
  CHECK(q_r > 0.0);
  CHECK(q_r < 1.0);
}

TEST_CASE("composite utility matches the worked examples") {
  UtilityWeights w;
  const auto perfect = composite_utility(w, 1.0, 1.0, 1.0);
  CHECK(perfect.q_total == 1.0);
  CHECK(perfect.q_wireless == 2.0);

  const auto halves = composite_utility(w, 1.0, 0.5, 0.5);
  CHECK(halves.q_total == doctest::Approx(0.55).epsilon(1e-14));
}

TEST_CASE("composite utility report carries its inputs") {
  UtilityWeights w;
  w.alpha = 0.2;
  w.beta = 0.3;
  const auto r = composite_utility(w, 0.5, 0.25, 0.75);
  CHECK(r.q_llm == 0.5);
  CHECK(r.q_c == 0.25);
  CHECK(r.q_r == 0.75);
  CHECK(r.q_wireless == doctest::Approx(1.0));
  CHECK(r.q_total == doctest::Approx(0.2 * 0.5 + 0.3 * 1.0));
  CHECK(r.weights.alpha == 0.2);
  CHECK(r.weights.beta == 0.3);
}

}  // TEST_SUITE("scoring")
