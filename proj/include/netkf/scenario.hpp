#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netkf/channel.hpp"
#include "netkf/robot.hpp"

namespace netkf {

/// Open-loop wheel-command profile followed by the controller.
struct TrajectoryProfile {
  enum class Kind { arc, sine };
  Kind kind = Kind::arc;
  double speed = 0.2;           // m/s, forward speed of the robot center
  double turn_rate = 0.04;      // rad/s, constant heading rate (arc)
  double turn_amplitude = 0.08; // rad/s, peak heading rate (sine)
  double period = 30.0;         // s, heading-rate period (sine)
};

/// Everything a Monte Carlo run needs. Channel seeds are derived per trial
/// from master_seed, so the seed fields inside the channel configs here are
/// ignored.
struct ScenarioConfig {
  std::string name = "custom";
  RobotParams robot;
  TrajectoryProfile profile;
  ChannelConfig ctrl_channel;
  ChannelConfig meas_channel;
  Mat meas_noise = measurement_noise_cov();
  long length = 600;  // ticks per trial
  long runs = 100;
  std::uint64_t master_seed = 73;
  std::vector<std::string> filters = {"poekf", "ekf", "refilter"};
  std::size_t history_capacity = kDefaultHistoryCapacity;
};

/// Initial estimate covariance: diag(kInitCovDiag) with the true pose as
/// the initial mean.
inline constexpr double kInitCovDiag = 0.01;

/// Wheel speeds realizing the profile's (speed, heading rate) at a tick:
/// speed = (R/2)(wl + wr), heading rate = (R/L)(wl - wr).
WheelSpeeds profile_command(const ScenarioConfig& cfg, long tick);

/// The four built-in scenarios: sim1, sim2, local, vpn.
/// Throws std::invalid_argument for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

/// Parses a flat key-value scenario file (one `key = value` per line, `#`
/// comments). Unknown keys or malformed values raise std::invalid_argument
/// with the offending line number.
ScenarioConfig load_scenario_file(const std::string& path);

/// Builtin name if it matches, otherwise treats the argument as a file path.
ScenarioConfig resolve_scenario(const std::string& name_or_path);

/// Throws std::invalid_argument when the config is not runnable.
void validate_scenario(const ScenarioConfig& cfg);

}  // namespace netkf
