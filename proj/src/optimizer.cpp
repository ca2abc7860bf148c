#include "cotnet/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cotnet/errors.hpp"
#include "cotnet/physics.hpp"
#include "cotnet/scoring.hpp"

namespace cotnet::opt {

namespace {

// Ascending lattice values 0, step, 2*step, ... capped at hi, with hi itself
// always included so the boundary (and the power cap) stays reachable.
std::vector<double> lattice(double hi, double step) {
  std::vector<double> v;
  for (double x = 0.0; x <= hi + 1e-9; x += step) v.push_back(std::min(x, hi));
  if (v.empty() || v.back() < hi - 1e-9) v.push_back(hi);
  return v;
}

double apply_and_score(const netsim::NetworkScenario& scenario,
                       const DeploymentDecision& d) {
  std::vector<std::array<double, 2>> xy(d.uav_positions.size());
  for (std::size_t i = 0; i < d.uav_positions.size(); ++i)
    xy[i] = {d.uav_positions[i].x, d.uav_positions[i].y};
  const auto deployed =
      netsim::with_deployment(scenario, xy, d.tx_powers_dbm);
  const auto metrics = netsim::evaluate_scenario(deployed);
  const auto [q_c, q_r] = scoring::q_wireless(metrics, deployed);
  return q_c + q_r;
}

DeploymentDecision current_decision(const netsim::NetworkScenario& s) {
  DeploymentDecision d;
  d.uav_positions.reserve(s.uavs.size());
  d.tx_powers_dbm.reserve(s.uavs.size());
  for (const auto& uav : s.uavs) {
    d.uav_positions.push_back(uav.position);
    d.tx_powers_dbm.push_back(uav.tx_power_dbm);
  }
  return d;
}

struct Candidate {
  double x, y, power;
  double objective;
};

// Phase 1 for one UAV slot: evaluate the full lattice with the other slots
// frozen, returning candidates sorted best-first (ties keep lattice order).
std::vector<Candidate> grid_candidates(const netsim::NetworkScenario& scenario,
                                       DeploymentDecision d, std::size_t slot,
                                       double grid_step_m,
                                       double power_step_db) {
  const auto xs = lattice(scenario.area_m.width, grid_step_m);
  const auto ys = lattice(scenario.area_m.height, grid_step_m);
  const auto ps = lattice(scenario.max_tx_power_dbm, power_step_db);

  std::vector<Candidate> cells;
  cells.reserve(xs.size() * ys.size() * ps.size());
  for (double y : ys)
    for (double x : xs)
      for (double p : ps) {
        d.uav_positions[slot].x = x;
        d.uav_positions[slot].y = y;
        d.tx_powers_dbm[slot] = p;
        cells.push_back({x, y, p, apply_and_score(scenario, d)});
      }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.objective > b.objective;
                   });
  return cells;
}

// Phase 2: opportunistic axis polling from one start point. Accepts a move
// as soon as it strictly improves; halves both steps after a round with no
// acceptance; stops when the position step falls below 1 m.
Candidate pattern_search(const netsim::NetworkScenario& scenario,
                         DeploymentDecision d, std::size_t slot,
                         Candidate start, const OptimizerConfig& cfg) {
  double pos_step = cfg.local_step_init_m;
  double pow_step = cfg.power_step_db;
  Candidate best = start;

  auto probe = [&](double x, double y, double p) {
    x = std::clamp(x, 0.0, scenario.area_m.width);
    y = std::clamp(y, 0.0, scenario.area_m.height);
    p = std::clamp(p, 0.0, scenario.max_tx_power_dbm);
    d.uav_positions[slot].x = x;
    d.uav_positions[slot].y = y;
    d.tx_powers_dbm[slot] = p;
    const double obj = apply_and_score(scenario, d);
    if (obj > best.objective) {
      best = {x, y, p, obj};
      return true;
    }
    return false;
  };

  for (int iter = 0; iter < cfg.local_search_iters; ++iter) {
    bool improved = false;
    improved |= probe(best.x + pos_step, best.y, best.power);
    improved |= probe(best.x - pos_step, best.y, best.power);
    improved |= probe(best.x, best.y + pos_step, best.power);
    improved |= probe(best.x, best.y - pos_step, best.power);
    improved |= probe(best.x, best.y, best.power + pow_step);
    improved |= probe(best.x, best.y, best.power - pow_step);
    if (!improved) {
      pos_step *= 0.5;
      pow_step *= 0.5;
      if (pos_step < 1.0) break;
    }
  }
  return best;
}

}  // namespace

double wireless_objective(const netsim::NetworkScenario& scenario,
                          const DeploymentDecision& decision) {
  if (decision.uav_positions.size() != scenario.uavs.size() ||
      decision.tx_powers_dbm.size() != scenario.uavs.size()) {
    throw DomainError("deployment decision does not match UAV slot count");
  }
  return apply_and_score(scenario, decision);
}

DeploymentDecision optimize_deployment(const netsim::NetworkScenario& scenario,
                                       const OptimizerConfig& cfg) {
  if (cfg.coarse_grid_step_m <= 0.0 || cfg.power_step_db <= 0.0)
    throw DomainError("optimizer steps must be positive");

  DeploymentDecision best = current_decision(scenario);

  double cx = 0.0, cy = 0.0;
  for (const auto& u : scenario.users) {
    cx += u.position.x;
    cy += u.position.y;
  }
  cx /= static_cast<double>(scenario.users.size());
  cy /= static_cast<double>(scenario.users.size());

  for (std::size_t slot = 0; slot < scenario.uavs.size(); ++slot) {
    auto cells = grid_candidates(scenario, best, slot, cfg.coarse_grid_step_m,
                                 cfg.power_step_db);

    std::vector<Candidate> starts(
        cells.begin(),
        cells.begin() + std::min<std::size_t>(5, cells.size()));
    {
      DeploymentDecision probe = best;
      probe.uav_positions[slot].x = cx;
      probe.uav_positions[slot].y = cy;
      probe.tx_powers_dbm[slot] = scenario.max_tx_power_dbm;
      starts.push_back(
          {cx, cy, scenario.max_tx_power_dbm, apply_and_score(scenario, probe)});
    }

    // The coverage term is piecewise constant in position, so pattern search
    // cannot walk between basins; seed it with extra anchors screened at max
    // power and refine only the best few. Anchors are a half-step position
    // lattice plus user positions and pairwise midpoints; midpoints are
    // quadratic in user count, so they are skipped on very large instances.
    {
      std::vector<std::array<double, 2>> anchors;
      const auto fine_xs =
          lattice(scenario.area_m.width, 0.5 * cfg.coarse_grid_step_m);
      const auto fine_ys =
          lattice(scenario.area_m.height, 0.5 * cfg.coarse_grid_step_m);
      for (double y : fine_ys)
        for (double x : fine_xs) anchors.push_back({x, y});
      for (const auto& u : scenario.users)
        anchors.push_back({u.position.x, u.position.y});
      if (scenario.users.size() <= 32) {
        for (std::size_t i = 0; i < scenario.users.size(); ++i)
          for (std::size_t j = i + 1; j < scenario.users.size(); ++j)
            anchors.push_back(
                {0.5 * (scenario.users[i].position.x +
                        scenario.users[j].position.x),
                 0.5 * (scenario.users[i].position.y +
                        scenario.users[j].position.y)});
      }
      DeploymentDecision probe = best;
      std::vector<Candidate> screened;
      screened.reserve(anchors.size());
      for (const auto& a : anchors) {
        probe.uav_positions[slot].x = a[0];
        probe.uav_positions[slot].y = a[1];
        probe.tx_powers_dbm[slot] = scenario.max_tx_power_dbm;
        screened.push_back({a[0], a[1], scenario.max_tx_power_dbm,
                            apply_and_score(scenario, probe)});
      }
      std::stable_sort(screened.begin(), screened.end(),
                       [](const Candidate& a, const Candidate& b) {
                         return a.objective > b.objective;
                       });
      starts.insert(starts.end(), screened.begin(),
                    screened.begin() +
                        std::min<std::size_t>(8, screened.size()));
    }

    Candidate winner{0.0, 0.0, 0.0, -1.0};
    for (const auto& s : starts) {
      const Candidate refined = pattern_search(scenario, best, slot, s, cfg);
      if (refined.objective > winner.objective) winner = refined;
    }

    best.uav_positions[slot].x = winner.x;
    best.uav_positions[slot].y = winner.y;
    best.tx_powers_dbm[slot] = winner.power;
  }
  return best;
}

namespace {

OracleResult oracle_impl(const netsim::NetworkScenario& scenario,
                         double grid_step_m, double power_step_db,
                         bool parallel) {
  if (grid_step_m <= 0.0 || power_step_db <= 0.0)
    throw DomainError("oracle steps must be positive");

  const auto xs = lattice(scenario.area_m.width, grid_step_m);
  const auto ys = lattice(scenario.area_m.height, grid_step_m);
  const auto ps = lattice(scenario.max_tx_power_dbm, power_step_db);
  const std::size_t nx = xs.size(), ny = ys.size(), np = ps.size();
  const std::size_t per_uav = nx * ny * np;
  const std::size_t n_uavs = scenario.uavs.size();

  double total_d = 1.0;
  for (std::size_t i = 0; i < n_uavs; ++i) total_d *= static_cast<double>(per_uav);
  if (total_d > 1e7)
    throw SizeError("oracle lattice exceeds 1e7 evaluations");
  std::size_t total = 1;
  for (std::size_t i = 0; i < n_uavs; ++i) total *= per_uav;

  // Linear index decodes per UAV slot as ((iy*nx)+ix)*np + ip, the highest
  // slot varying slowest; low index wins ties in both modes.
  auto decode = [&](std::size_t idx, DeploymentDecision& d) {
    for (std::size_t s = n_uavs; s-- > 0;) {
      const std::size_t cell = idx % per_uav;
      idx /= per_uav;
      const std::size_t ip = cell % np;
      const std::size_t ix = (cell / np) % nx;
      const std::size_t iy = cell / (np * nx);
      d.uav_positions[s].x = xs[ix];
      d.uav_positions[s].y = ys[iy];
      d.tx_powers_dbm[s] = ps[ip];
    }
  };

  const DeploymentDecision base = current_decision(scenario);
  double best_obj = -std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;

  if (parallel) {
#pragma omp parallel
    {
      DeploymentDecision local = base;
      double local_obj = -std::numeric_limits<double>::infinity();
      std::size_t local_idx = 0;
#pragma omp for schedule(static)
      for (long long i = 0; i < static_cast<long long>(total); ++i) {
        decode(static_cast<std::size_t>(i), local);
        const double obj = apply_and_score(scenario, local);
        if (obj > local_obj ||
            (obj == local_obj && static_cast<std::size_t>(i) < local_idx)) {
          local_obj = obj;
          local_idx = static_cast<std::size_t>(i);
        }
      }
#pragma omp critical
      {
        if (local_obj > best_obj ||
            (local_obj == best_obj && local_idx < best_idx)) {
          best_obj = local_obj;
          best_idx = local_idx;
        }
      }
    }
  } else {
    DeploymentDecision local = base;
    for (std::size_t i = 0; i < total; ++i) {
      decode(i, local);
      const double obj = apply_and_score(scenario, local);
      if (obj > best_obj) {
        best_obj = obj;
        best_idx = i;
      }
    }
  }

  OracleResult out;
  out.best_decision = base;
  decode(best_idx, out.best_decision);
  out.best_objective = best_obj;
  out.evaluations = total;
  return out;
}

}  // namespace

OracleResult brute_force_oracle(const netsim::NetworkScenario& scenario,
                                double grid_step_m, double power_step_db) {
  return oracle_impl(scenario, grid_step_m, power_step_db, true);
}

OracleResult brute_force_oracle_serial(const netsim::NetworkScenario& scenario,
                                       double grid_step_m,
                                       double power_step_db) {
  return oracle_impl(scenario, grid_step_m, power_step_db, false);
}

DeploymentDecision centroid_baseline(const netsim::NetworkScenario& scenario) {
  if (scenario.users.empty()) throw DomainError("centroid needs >= 1 user");
  double cx = 0.0, cy = 0.0;
  for (const auto& u : scenario.users) {
    cx += u.position.x;
    cy += u.position.y;
  }
  cx /= static_cast<double>(scenario.users.size());
  cy /= static_cast<double>(scenario.users.size());

  DeploymentDecision d = current_decision(scenario);
  for (std::size_t i = 0; i < d.uav_positions.size(); ++i) {
    d.uav_positions[i].x = cx;
    d.uav_positions[i].y = cy;
    d.tx_powers_dbm[i] = scenario.max_tx_power_dbm;
  }
  return d;
}

}  // namespace cotnet::opt
