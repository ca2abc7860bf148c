// Times the brute-force deployment oracle with the OpenMP kernel against the
// serial reference on the same grid and checks that both agree.
#include <chrono>
#include <cstdio>

#include "cotnet/optimizer.hpp"
#include "cotnet/physics.hpp"
#include "cotnet/scenario.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int main() {
  using namespace cotnet;

  netsim::NetworkScenario s;
  s.users = netsim::generate_users(42, 25, s.area_m);
  netsim::UavNode uav;
  uav.id = 0;
  uav.position = {500.0, 500.0, 100.0};
  uav.tx_power_dbm = 20.0;
  uav.comm_range_m = 400.0;
  s.uavs = {uav};
  netsim::validate_scenario(s);

  const double grid_step = 20.0;
  const double power_step = 1.0;

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled at build time\n");
#endif

  auto t0 = Clock::now();
  const auto serial = opt::brute_force_oracle_serial(s, grid_step, power_step);
  const double t_serial = seconds_since(t0);

  t0 = Clock::now();
  const auto parallel = opt::brute_force_oracle(s, grid_step, power_step);
  const double t_parallel = seconds_since(t0);

  std::printf("evaluations: %zu\n", static_cast<std::size_t>(serial.evaluations));
  std::printf("serial:   %.3f s  objective %.9f\n", t_serial,
              serial.best_objective);
  std::printf("parallel: %.3f s  objective %.9f\n", t_parallel,
              parallel.best_objective);
  if (t_parallel > 0.0)
    std::printf("speedup: %.2fx\n", t_serial / t_parallel);

  const bool same_obj = serial.best_objective == parallel.best_objective;
  bool same_pos =
      serial.best_decision.tx_powers_dbm == parallel.best_decision.tx_powers_dbm &&
      serial.best_decision.uav_positions.size() ==
          parallel.best_decision.uav_positions.size();
  for (std::size_t i = 0; same_pos && i < serial.best_decision.uav_positions.size();
       ++i) {
    const auto& a = serial.best_decision.uav_positions[i];
    const auto& b = parallel.best_decision.uav_positions[i];
    same_pos = a.x == b.x && a.y == b.y && a.z == b.z;
  }
  if (!same_obj || !same_pos) {
    std::printf("MISMATCH between serial and parallel results\n");
    return 1;
  }
  std::printf("serial and parallel results match\n");
  return 0;
}
