#pragma once

#include <string>

#include "netkf/simulation.hpp"

namespace netkf {

/// Shortest decimal form that round-trips the exact double (%.17g).
std::string format_full(double v);

/// trajectory.csv: tick,true_x,true_y,true_theta then, per filter,
/// <name>_est_x,<name>_est_y,<name>_est_theta. Rows come from the first
/// trial of the run set.
void write_trajectory_csv(const std::string& path, const MonteCarloResult& mc);

/// rmse.csv: tick then, per filter, <name>_rmse_x,<name>_rmse_y,
/// <name>_rmse_theta across all runs.
void write_rmse_csv(const std::string& path, const MonteCarloResult& mc);

/// cost.csv: filter,flops_total,flops_normalized,wall_time_normalized with
/// normalization against the naive EKF from the same run set (nan when the
/// naive EKF was not enabled). Wall time varies between executions; the
/// flop columns are the reproducible cost metric.
void write_cost_csv(const std::string& path, const MonteCarloResult& mc);

}  // namespace netkf
