#include "cotnet/scenario.hpp"

#include <set>

#include "cotnet/errors.hpp"

namespace cotnet::netsim {

void validate_scenario(const NetworkScenario& s) {
  if (!(s.area_m.width > 0.0) || !(s.area_m.height > 0.0)) {
    throw DomainError("scenario: area dimensions must be > 0");
  }
  if (s.users.empty()) throw DomainError("scenario: at least one user required");
  if (s.uavs.empty()) throw DomainError("scenario: at least one UAV slot required");
  if (!(s.channel.carrier_freq_hz > 0.0) || !(s.channel.bandwidth_hz > 0.0) ||
      !(s.channel.temperature_k > 0.0) || !(s.channel.boltzmann_j_per_k > 0.0)) {
    throw DomainError("scenario: channel parameters must be > 0");
  }
  std::set<int> ids;
  for (const UserTerminal& u : s.users) {
    if (!ids.insert(u.id).second) {
      throw DomainError("scenario: duplicate user id");
    }
    if (u.position.z != 0.0) throw DomainError("scenario: users must be at z=0");
    if (u.position.x < 0.0 || u.position.x > s.area_m.width ||
        u.position.y < 0.0 || u.position.y > s.area_m.height) {
      throw DomainError("scenario: user outside area bounds");
    }
    if (!std::isfinite(u.position.x) || !std::isfinite(u.position.y)) {
      throw DomainError("scenario: non-finite user coordinate");
    }
  }
  for (const UavNode& v : s.uavs) {
    if (!(v.position.z > 0.0)) throw DomainError("scenario: UAV altitude must be > 0");
    if (v.tx_power_dbm < 0.0 || v.tx_power_dbm > s.max_tx_power_dbm) {
      throw DomainError("scenario: UAV power outside [0, max_tx_power_dbm]");
    }
    if (!(v.comm_range_m > 0.0)) {
      throw DomainError("scenario: UAV comm_range_m must be > 0");
    }
  }
}

NetworkScenario with_deployment(const NetworkScenario& s,
                                std::span<const std::array<double, 2>> xy,
                                std::span<const double> powers_dbm) {
  if (xy.size() != s.uavs.size() || powers_dbm.size() != s.uavs.size()) {
    throw DomainError("with_deployment: decision size != UAV slot count");
  }
  NetworkScenario out = s;
  for (std::size_t i = 0; i < out.uavs.size(); ++i) {
    out.uavs[i].position.x = xy[i][0];
    out.uavs[i].position.y = xy[i][1];
    out.uavs[i].tx_power_dbm = powers_dbm[i];
  }
  return out;
}

void to_json(nlohmann::json& j, const Position3D& p) {
  j = {{"x", p.x}, {"y", p.y}, {"z", p.z}};
}
void from_json(const nlohmann::json& j, Position3D& p) {
  j.at("x").get_to(p.x);
  j.at("y").get_to(p.y);
  j.at("z").get_to(p.z);
}

void to_json(nlohmann::json& j, const UserTerminal& u) {
  j = {{"id", u.id}, {"position", u.position}};
}
void from_json(const nlohmann::json& j, UserTerminal& u) {
  j.at("id").get_to(u.id);
  j.at("position").get_to(u.position);
}

void to_json(nlohmann::json& j, const UavNode& u) {
  j = {{"id", u.id},
       {"position", u.position},
       {"tx_power_dbm", u.tx_power_dbm},
       {"comm_range_m", u.comm_range_m}};
}
void from_json(const nlohmann::json& j, UavNode& u) {
  j.at("id").get_to(u.id);
  j.at("position").get_to(u.position);
  j.at("tx_power_dbm").get_to(u.tx_power_dbm);
  j.at("comm_range_m").get_to(u.comm_range_m);
}

void to_json(nlohmann::json& j, const ChannelParams& c) {
  j = {{"carrier_freq_hz", c.carrier_freq_hz},
       {"bandwidth_hz", c.bandwidth_hz},
       {"temperature_k", c.temperature_k},
       {"boltzmann_j_per_k", c.boltzmann_j_per_k}};
}
void from_json(const nlohmann::json& j, ChannelParams& c) {
  j.at("carrier_freq_hz").get_to(c.carrier_freq_hz);
  j.at("bandwidth_hz").get_to(c.bandwidth_hz);
  j.at("temperature_k").get_to(c.temperature_k);
  j.at("boltzmann_j_per_k").get_to(c.boltzmann_j_per_k);
}

void to_json(nlohmann::json& j, const AreaSize& a) {
  j = {{"width", a.width}, {"height", a.height}};
}
void from_json(const nlohmann::json& j, AreaSize& a) {
  j.at("width").get_to(a.width);
  j.at("height").get_to(a.height);
}

void to_json(nlohmann::json& j, const NetworkScenario& s) {
  j = {{"area_m", s.area_m},
       {"users", s.users},
       {"uavs", s.uavs},
       {"channel", s.channel},
       {"max_tx_power_dbm", s.max_tx_power_dbm}};
}
void from_json(const nlohmann::json& j, NetworkScenario& s) {
  j.at("area_m").get_to(s.area_m);
  j.at("users").get_to(s.users);
  j.at("uavs").get_to(s.uavs);
  j.at("channel").get_to(s.channel);
  j.at("max_tx_power_dbm").get_to(s.max_tx_power_dbm);
}

}  // namespace cotnet::netsim
