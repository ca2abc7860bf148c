#pragma once

#include <cstdint>
#include <vector>

#include "cotnet/scenario.hpp"

namespace cotnet::opt {

// A candidate deployment: one ground position and transmit power per UAV
// slot. Altitudes stay at the scenario's fixed flight altitude.
struct DeploymentDecision {
  std::vector<netsim::Position3D> uav_positions;
  std::vector<double> tx_powers_dbm;
};

struct OptimizerConfig {
  double coarse_grid_step_m = 100.0;  // phase-1 spatial resolution
  double power_step_db = 2.0;         // phase-1 power resolution
  int local_search_iters = 200;       // phase-2 poll rounds per start point
  double local_step_init_m = 50.0;    // phase-2 initial move size
  std::uint64_t seed = 1;             // reserved; search is start-point driven
};

struct OracleResult {
  DeploymentDecision best_decision;
  double best_objective = 0.0;
  std::uint64_t evaluations = 0;
};

// Q_c + Q_R after applying the decision to the scenario. Throws DomainError
// when the decision's list lengths do not match the UAV slot count.
double wireless_objective(const netsim::NetworkScenario& scenario,
                          const DeploymentDecision& decision);

// Two-phase heuristic, per UAV slot in index order with the other slots held
// fixed: (1) coarse lattice over positions x power levels; (2) axis-aligned
// pattern search (step halved when no move improves, stop when the position
// step drops below 1 m or the poll budget runs out), restarted from the best
// lattice cells and from the user centroid at max power. The result is never
// worse than the best lattice cell or the centroid baseline.
DeploymentDecision optimize_deployment(const netsim::NetworkScenario& scenario,
                                       const OptimizerConfig& cfg);

// Exhaustive lattice enumeration at the given resolution, joint over all UAV
// slots. Throws SizeError when the lattice exceeds 1e7 evaluations. Ties
// resolve to the lowest linear index; for one UAV that index is
// ((iy*nx)+ix)*np + ip (row-major position, low power first).
OracleResult brute_force_oracle(const netsim::NetworkScenario& scenario,
                                double grid_step_m, double power_step_db);

// Serial twin of brute_force_oracle, kept as the reference implementation
// for validating the parallel reduction.
OracleResult brute_force_oracle_serial(const netsim::NetworkScenario& scenario,
                                       double grid_step_m,
                                       double power_step_db);

// Every UAV at the users' centroid at max power; the non-reasoning baseline.
DeploymentDecision centroid_baseline(const netsim::NetworkScenario& scenario);

}  // namespace cotnet::opt
