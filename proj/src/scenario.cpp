#include "netkf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netkf {

namespace {

const std::set<std::string> kKnownFilters = {"poekf", "ekf", "refilter",
                                             "oracle"};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void config_error(int line, const std::string& what) {
  std::ostringstream msg;
  msg << "scenario config line " << line << ": " << what;
  throw std::invalid_argument(msg.str());
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_error(line, "expected a number, got '" + v + "'");
  }
}

long parse_long(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_error(line, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_seed(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    config_error(line, "expected an unsigned integer, got '" + v + "'");
  }
}

}  // namespace

WheelSpeeds profile_command(const ScenarioConfig& cfg, long tick) {
  const double time = static_cast<double>(tick) * cfg.robot.ts;
  double heading_rate = 0.0;
  switch (cfg.profile.kind) {
    case TrajectoryProfile::Kind::arc:
      heading_rate = cfg.profile.turn_rate;
      break;
    case TrajectoryProfile::Kind::sine:
      heading_rate = cfg.profile.turn_amplitude *
                     std::cos(2.0 * kPi * time / cfg.profile.period);
      break;
  }
  // Invert speed = (R/2)(wl + wr), heading_rate = (R/L)(wl - wr).
  const double r = cfg.robot.wheel_radius;
  const double sum = 2.0 * cfg.profile.speed / r;
  const double diff = heading_rate * cfg.robot.wheel_base / r;
  return WheelSpeeds{0.5 * (sum + diff), 0.5 * (sum - diff)};
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig cfg;
  cfg.name = name;
  if (name == "sim1") {
    cfg.profile.kind = TrajectoryProfile::Kind::arc;
    cfg.ctrl_channel = ChannelConfig{1, 8, 0.01, 0};
    cfg.meas_channel = ChannelConfig{1, 8, 0.01, 0};
    cfg.master_seed = 73;
  } else if (name == "sim2") {
    cfg.profile.kind = TrajectoryProfile::Kind::sine;
    cfg.ctrl_channel = ChannelConfig{8, 15, 0.10, 0};
    cfg.meas_channel = ChannelConfig{8, 15, 0.10, 0};
    cfg.master_seed = 74;
  } else if (name == "local") {
    cfg.profile.kind = TrajectoryProfile::Kind::arc;
    cfg.ctrl_channel = ChannelConfig{3, 5, 0.015, 0};
    cfg.meas_channel = ChannelConfig{3, 5, 0.015, 0};
    cfg.master_seed = 75;
  } else if (name == "vpn") {
    cfg.profile.kind = TrajectoryProfile::Kind::arc;
    cfg.ctrl_channel = ChannelConfig{6, 8, 0.02, 0};
    cfg.meas_channel = ChannelConfig{6, 8, 0.02, 0};
    cfg.master_seed = 76;
  } else {
    throw std::invalid_argument("unknown built-in scenario '" + name + "'");
  }
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open scenario file '" + path + "'");
  }

  ScenarioConfig cfg;
  cfg.name = "custom";
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error(line_no, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error(line_no, "empty key");

    if (key == "name") {
      cfg.name = value;
    } else if (key == "ts") {
      cfg.robot.ts = parse_double(value, line_no);
    } else if (key == "wheel_radius") {
      cfg.robot.wheel_radius = parse_double(value, line_no);
    } else if (key == "wheel_base") {
      cfg.robot.wheel_base = parse_double(value, line_no);
    } else if (key == "delta") {
      cfg.robot.delta = parse_double(value, line_no);
    } else if (key == "meas_noise_x") {
      cfg.meas_noise(0, 0) = parse_double(value, line_no);
    } else if (key == "meas_noise_y") {
      cfg.meas_noise(1, 1) = parse_double(value, line_no);
    } else if (key == "meas_noise_theta") {
      cfg.meas_noise(2, 2) = parse_double(value, line_no);
    } else if (key == "profile") {
      if (value == "arc") {
        cfg.profile.kind = TrajectoryProfile::Kind::arc;
      } else if (value == "sine") {
        cfg.profile.kind = TrajectoryProfile::Kind::sine;
      } else {
        config_error(line_no, "profile must be 'arc' or 'sine'");
      }
    } else if (key == "profile_speed") {
      cfg.profile.speed = parse_double(value, line_no);
    } else if (key == "profile_turn_rate") {
      cfg.profile.turn_rate = parse_double(value, line_no);
    } else if (key == "profile_turn_amplitude") {
      cfg.profile.turn_amplitude = parse_double(value, line_no);
    } else if (key == "profile_period") {
      cfg.profile.period = parse_double(value, line_no);
    } else if (key == "ctrl_delay_min") {
      cfg.ctrl_channel.delay_min = parse_long(value, line_no);
    } else if (key == "ctrl_delay_max") {
      cfg.ctrl_channel.delay_max = parse_long(value, line_no);
    } else if (key == "ctrl_loss") {
      cfg.ctrl_channel.loss_prob = parse_double(value, line_no);
    } else if (key == "meas_delay_min") {
      cfg.meas_channel.delay_min = parse_long(value, line_no);
    } else if (key == "meas_delay_max") {
      cfg.meas_channel.delay_max = parse_long(value, line_no);
    } else if (key == "meas_loss") {
      cfg.meas_channel.loss_prob = parse_double(value, line_no);
    } else if (key == "length") {
      cfg.length = parse_long(value, line_no);
    } else if (key == "runs") {
      cfg.runs = parse_long(value, line_no);
    } else if (key == "master_seed") {
      cfg.master_seed = parse_seed(value, line_no);
    } else if (key == "filters") {
      cfg.filters = split_list(value);
    } else if (key == "history_capacity") {
      const long cap = parse_long(value, line_no);
      if (cap <= 0) config_error(line_no, "history_capacity must be positive");
      cfg.history_capacity = static_cast<std::size_t>(cap);
    } else {
      config_error(line_no, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

ScenarioConfig resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "sim1" || name_or_path == "sim2" ||
      name_or_path == "local" || name_or_path == "vpn") {
    return builtin_scenario(name_or_path);
  }
  return load_scenario_file(name_or_path);
}

void validate_scenario(const ScenarioConfig& cfg) {
  validate_params(cfg.robot);
  validate_channel_config(cfg.ctrl_channel);
  validate_channel_config(cfg.meas_channel);
  if (cfg.length < 1) throw std::invalid_argument("scenario: length must be >= 1");
  if (cfg.runs < 1) throw std::invalid_argument("scenario: runs must be >= 1");
  if (cfg.filters.empty()) {
    throw std::invalid_argument("scenario: at least one filter is required");
  }
  std::set<std::string> seen;
  for (const auto& f : cfg.filters) {
    if (kKnownFilters.count(f) == 0) {
      throw std::invalid_argument(
          "scenario: unknown filter '" + f +
          "' (known: poekf, ekf, refilter, oracle)");
    }
    if (f == "oracle") {
      throw std::invalid_argument(
          "scenario: the 'oracle' filter is exact only for linear systems "
          "and cannot run on robot scenarios; use poekf, ekf, or refilter");
    }
    if (!seen.insert(f).second) {
      throw std::invalid_argument("scenario: duplicate filter '" + f + "'");
    }
  }
  if (cfg.profile.kind == TrajectoryProfile::Kind::sine &&
      !(cfg.profile.period > 0.0)) {
    throw std::invalid_argument("scenario: profile_period must be positive");
  }
  if (!std::isfinite(cfg.profile.speed) ||
      !std::isfinite(cfg.profile.turn_rate) ||
      !std::isfinite(cfg.profile.turn_amplitude)) {
    throw std::invalid_argument("scenario: profile parameters must be finite");
  }
  require_psd(cfg.meas_noise, "scenario: measurement noise");
  if (cfg.history_capacity == 0) {
    throw std::invalid_argument("scenario: history_capacity must be positive");
  }
  const long max_delay = std::max(cfg.ctrl_channel.delay_max,
                                  cfg.meas_channel.delay_max);
  if (max_delay > static_cast<long>(cfg.history_capacity)) {
    throw std::invalid_argument(
        "scenario: channel delay_max exceeds history_capacity");
  }
}

}  // namespace netkf
