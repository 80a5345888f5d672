#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "netkf/baselines.hpp"
#include "netkf/scenario.hpp"

namespace netkf {

/// Uniform view of the estimators a scenario can run.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual void predict(const Vec& u_eff) = 0;
  virtual FuseOutcome fuse(const MeasurementPacket& pkt) = 0;
  virtual const GaussianState& state() const = 0;
  virtual long long flop_total() const = 0;
  virtual long stale_discards() const = 0;
};

/// Builds a named estimator (poekf, ekf, refilter) for the scenario's robot
/// model and initial state. Throws std::invalid_argument for other names.
std::unique_ptr<Estimator> make_estimator(const std::string& name,
                                          const ScenarioConfig& cfg);

/// One closed-loop simulation: plant, both channels, every enabled filter.
/// All series run over ticks 0..length inclusive.
struct TrialResult {
  std::vector<Vec> truth;                   // true pose per tick
  std::vector<std::vector<Vec>> estimates;  // [filter][tick]
  std::vector<long long> flops;             // [filter]
  std::vector<double> wall_seconds;         // [filter]
  std::vector<long> stale_discards;         // [filter]
};

/// Deterministic function of (cfg, trial_index); the per-trial RNG streams
/// are derived from cfg.master_seed and the trial index.
TrialResult run_trial(const ScenarioConfig& cfg, long trial_index);

struct MonteCarloResult {
  std::vector<std::string> filter_names;
  long length = 0;
  /// Per-filter, per-component (x, y, theta) RMSE across runs, per tick.
  std::vector<std::array<std::vector<double>, 3>> rmse;
  std::vector<long long> flop_totals;
  std::vector<double> wall_totals;
  std::vector<long> stale_totals;
  /// Trial 0, kept for trajectory output.
  TrialResult sample_trial;
};

/// Runs cfg.runs trials (in parallel when threads != 1) and aggregates in
/// trial order, so the result is identical for any worker count.
/// threads = 0 picks the hardware concurrency.
MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg, int threads = 0);

/// Mean of a per-tick series over its final half (the steady state).
double steady_state_mean(const std::vector<double>& series);

/// Per-component steady-state RMSE for one filter.
std::array<double, 3> steady_state_rmse(const MonteCarloResult& mc,
                                        const std::string& filter);

/// Flop total of `filter` divided by the naive EKF's total from the same
/// run set; NaN when the naive EKF was not among the filters.
double normalized_flops(const MonteCarloResult& mc, const std::string& filter);

/// Index of a filter in mc.filter_names; throws std::invalid_argument if
/// absent.
std::size_t filter_index(const MonteCarloResult& mc, const std::string& name);

}  // namespace netkf
