#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cotnet/scenario.hpp"

namespace cotnet::netsim {

inline constexpr double kSpeedOfLightMps = 299792458.0;

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Friis free-space path loss:
//   FSPL = 20 log10(d) + 20 log10(f) + 20 log10(4 pi / c)
double fspl_db(double distance_m, double freq_hz);

// Thermal noise floor over the full channel bandwidth:
//   N = 10 log10(k T B / 1 mW)
double noise_power_dbm(double bandwidth_hz, double temperature_k,
                       double boltzmann_j_per_k);

// Received power at the user from one UAV over the 3D link distance.
double received_power_dbm(const UserTerminal& user, const UavNode& uav,
                          const ChannelParams& channel);

// P_rx(serving) over (noise + sum of interferer rx powers), in dB. The noise
// term uses the full channel bandwidth regardless of later sharing.
double sinr_db(const UserTerminal& user, const UavNode& serving,
               std::span<const UavNode> interferers,
               const ChannelParams& channel);

// Shannon capacity B log2(1 + sinr) for the allocated bandwidth.
double link_rate_bps(double sinr_db_value, double allocated_bandwidth_hz);

// Index of the serving UAV for each user: strongest received power, lowest
// UAV index on ties.
std::vector<int> associate_users(const NetworkScenario& s);

// Full link-budget pass: association, geometric coverage (3D distance vs the
// serving UAV's comm_range_m), equal bandwidth split among each UAV's covered
// users, co-channel interference from all other UAVs.
NetworkMetrics evaluate_scenario(const NetworkScenario& s);

// Uniform user drop over [0,width) x [0,height) at z=0. Two splitmix64 draws
// per user (x then y) in id order; bit-reproducible across platforms.
std::vector<UserTerminal> generate_users(std::uint64_t seed, int count,
                                         const AreaSize& area);

}  // namespace cotnet::netsim
