#include "cotnet/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cotnet/errors.hpp"
#include "cotnet/splitmix64.hpp"

namespace cotnet::netsim {

double fspl_db(double distance_m, double freq_hz) {
  if (!(distance_m > 0.0)) throw DomainError("fspl_db: distance must be > 0");
  if (!(freq_hz > 0.0)) throw DomainError("fspl_db: frequency must be > 0");
  static const double k4PiOverC =
      20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLightMps);
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(freq_hz) + k4PiOverC;
}

double noise_power_dbm(double bandwidth_hz, double temperature_k,
                       double boltzmann_j_per_k) {
  if (!(bandwidth_hz > 0.0) || !(temperature_k > 0.0) ||
      !(boltzmann_j_per_k > 0.0)) {
    throw DomainError("noise_power_dbm: inputs must be > 0");
  }
  const double ktb_w = boltzmann_j_per_k * temperature_k * bandwidth_hz;
  return 10.0 * std::log10(ktb_w / 1e-3);
}

double received_power_dbm(const UserTerminal& user, const UavNode& uav,
                          const ChannelParams& channel) {
  const double d = distance(user.position, uav.position);
  return uav.tx_power_dbm - fspl_db(d, channel.carrier_freq_hz);
}

double sinr_db(const UserTerminal& user, const UavNode& serving,
               std::span<const UavNode> interferers,
               const ChannelParams& channel) {
  const double signal_mw = dbm_to_mw(received_power_dbm(user, serving, channel));
  const double noise_mw = dbm_to_mw(noise_power_dbm(
      channel.bandwidth_hz, channel.temperature_k, channel.boltzmann_j_per_k));
  double interference_mw = 0.0;
  for (const UavNode& other : interferers) {
    interference_mw += dbm_to_mw(received_power_dbm(user, other, channel));
  }
  return 10.0 * std::log10(signal_mw / (noise_mw + interference_mw));
}

double link_rate_bps(double sinr_db_value, double allocated_bandwidth_hz) {
  if (allocated_bandwidth_hz < 0.0) {
    throw DomainError("link_rate_bps: bandwidth must be >= 0");
  }
  if (allocated_bandwidth_hz == 0.0) return 0.0;
  return allocated_bandwidth_hz *
         std::log2(1.0 + std::pow(10.0, sinr_db_value / 10.0));
}

std::vector<int> associate_users(const NetworkScenario& s) {
  std::vector<int> serving(s.users.size(), 0);
  for (std::size_t ui = 0; ui < s.users.size(); ++ui) {
    double best_rx = -std::numeric_limits<double>::infinity();
    int best = 0;
    for (std::size_t vi = 0; vi < s.uavs.size(); ++vi) {
      const double rx = received_power_dbm(s.users[ui], s.uavs[vi], s.channel);
      if (rx > best_rx) {
        best_rx = rx;
        best = static_cast<int>(vi);
      }
    }
    serving[ui] = best;
  }
  return serving;
}

NetworkMetrics evaluate_scenario(const NetworkScenario& s) {
  if (s.users.empty()) throw DomainError("evaluate_scenario: no users");
  if (s.uavs.empty()) throw DomainError("evaluate_scenario: no UAVs");

  const std::vector<int> serving = associate_users(s);
  const std::size_t n_users = s.users.size();

  NetworkMetrics m;
  m.per_user_rate_bps.assign(n_users, 0.0);
  m.per_user_sinr_db.assign(n_users, 0.0);
  m.covered_flags.assign(n_users, false);

  std::vector<int> covered_per_uav(s.uavs.size(), 0);
  for (std::size_t ui = 0; ui < n_users; ++ui) {
    const UavNode& uav = s.uavs[serving[ui]];
    const double d = distance(s.users[ui].position, uav.position);
    if (d <= uav.comm_range_m) {
      m.covered_flags[ui] = true;
      ++covered_per_uav[serving[ui]];
    }
  }

  std::vector<UavNode> interferers;
  interferers.reserve(s.uavs.size());
  int covered_count = 0;
  for (std::size_t ui = 0; ui < n_users; ++ui) {
    const int vi = serving[ui];
    interferers.clear();
    for (std::size_t oi = 0; oi < s.uavs.size(); ++oi) {
      if (static_cast<int>(oi) != vi) interferers.push_back(s.uavs[oi]);
    }
    m.per_user_sinr_db[ui] =
        sinr_db(s.users[ui], s.uavs[vi], interferers, s.channel);
    if (m.covered_flags[ui]) {
      ++covered_count;
      const double share = s.channel.bandwidth_hz /
                           static_cast<double>(covered_per_uav[vi]);
      m.per_user_rate_bps[ui] = link_rate_bps(m.per_user_sinr_db[ui], share);
      m.sum_rate_bps += m.per_user_rate_bps[ui];
    }
  }
  m.coverage_ratio =
      static_cast<double>(covered_count) / static_cast<double>(n_users);
  return m;
}

std::vector<UserTerminal> generate_users(std::uint64_t seed, int count,
                                         const AreaSize& area) {
  if (count < 1) throw DomainError("generate_users: count must be >= 1");
  Splitmix64 rng(seed);
  std::vector<UserTerminal> users;
  users.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = rng.uniform01() * area.width;
    const double y = rng.uniform01() * area.height;
    users.push_back({i, {x, y, 0.0}});
  }
  return users;
}

}  // namespace cotnet::netsim
