#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cotnet::netsim {

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct UserTerminal {
  int id = 0;
  Position3D position;  // ground terminal, z == 0
};

struct UavNode {
  int id = 0;
  Position3D position;  // z is the flight altitude, > 0
  double tx_power_dbm = 20.0;
  double comm_range_m = 400.0;
};

struct ChannelParams {
  double carrier_freq_hz = 2.4e9;
  double bandwidth_hz = 2.0e7;
  double temperature_k = 290.0;
  double boltzmann_j_per_k = 1.380649e-23;
};

struct AreaSize {
  double width = 1000.0;
  double height = 1000.0;
};

// World state every decision is executed against.
struct NetworkScenario {
  AreaSize area_m;
  std::vector<UserTerminal> users;
  std::vector<UavNode> uavs;
  ChannelParams channel;
  double max_tx_power_dbm = 20.0;
};

struct NetworkMetrics {
  double coverage_ratio = 0.0;        // covered users / all users
  double sum_rate_bps = 0.0;          // sum of per_user_rate_bps
  std::vector<double> per_user_rate_bps;
  std::vector<double> per_user_sinr_db;
  std::vector<bool> covered_flags;
};

// Throws DomainError if any scenario invariant is broken (no users, no UAV
// slot, user off the ground or out of bounds, UAV at or below ground,
// power outside [0, max]).
void validate_scenario(const NetworkScenario& s);

// Copy of s with UAV ground positions and transmit powers replaced.
// Altitudes, ids and ranges are kept from the existing slots.
NetworkScenario with_deployment(const NetworkScenario& s,
                                std::span<const std::array<double, 2>> xy,
                                std::span<const double> powers_dbm);

void to_json(nlohmann::json& j, const Position3D& p);
void from_json(const nlohmann::json& j, Position3D& p);
void to_json(nlohmann::json& j, const UserTerminal& u);
void from_json(const nlohmann::json& j, UserTerminal& u);
void to_json(nlohmann::json& j, const UavNode& u);
void from_json(const nlohmann::json& j, UavNode& u);
void to_json(nlohmann::json& j, const ChannelParams& c);
void from_json(const nlohmann::json& j, ChannelParams& c);
void to_json(nlohmann::json& j, const AreaSize& a);
void from_json(const nlohmann::json& j, AreaSize& a);
void to_json(nlohmann::json& j, const NetworkScenario& s);
void from_json(const nlohmann::json& j, NetworkScenario& s);

}  // namespace cotnet::netsim
