#include "netkf/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace netkf {

namespace {

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  return out;
}

void finish_or_throw(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("failed while writing '" + path + "'");
  }
}

}  // namespace

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(const std::string& path,
                          const MonteCarloResult& mc) {
  auto out = open_or_throw(path);
  out << "tick,true_x,true_y,true_theta";
  for (const auto& name : mc.filter_names) {
    out << ',' << name << "_est_x," << name << "_est_y," << name
        << "_est_theta";
  }
  out << '\n';

  const TrialResult& trial = mc.sample_trial;
  for (long t = 0; t <= mc.length; ++t) {
    out << t;
    for (int c = 0; c < 3; ++c) out << ',' << format_full(trial.truth[t](c));
    for (std::size_t f = 0; f < mc.filter_names.size(); ++f) {
      for (int c = 0; c < 3; ++c) {
        out << ',' << format_full(trial.estimates[f][t](c));
      }
    }
    out << '\n';
  }
  finish_or_throw(out, path);
}

void write_rmse_csv(const std::string& path, const MonteCarloResult& mc) {
  auto out = open_or_throw(path);
  out << "tick";
  for (const auto& name : mc.filter_names) {
    out << ',' << name << "_rmse_x," << name << "_rmse_y," << name
        << "_rmse_theta";
  }
  out << '\n';

  for (long t = 0; t <= mc.length; ++t) {
    out << t;
    for (std::size_t f = 0; f < mc.filter_names.size(); ++f) {
      for (int c = 0; c < 3; ++c) out << ',' << format_full(mc.rmse[f][c][t]);
    }
    out << '\n';
  }
  finish_or_throw(out, path);
}

void write_cost_csv(const std::string& path, const MonteCarloResult& mc) {
  auto out = open_or_throw(path);
  out << "filter,flops_total,flops_normalized,wall_time_normalized\n";

  long ekf = -1;
  for (std::size_t i = 0; i < mc.filter_names.size(); ++i) {
    if (mc.filter_names[i] == "ekf") ekf = static_cast<long>(i);
  }
  for (std::size_t f = 0; f < mc.filter_names.size(); ++f) {
    const double flops_norm =
        ekf >= 0 ? static_cast<double>(mc.flop_totals[f]) /
                       static_cast<double>(mc.flop_totals[ekf])
                 : std::nan("");
    const double wall_norm =
        ekf >= 0 ? mc.wall_totals[f] / mc.wall_totals[ekf] : std::nan("");
    out << mc.filter_names[f] << ',' << mc.flop_totals[f] << ','
        << format_full(flops_norm) << ',' << format_full(wall_norm) << '\n';
  }
  finish_or_throw(out, path);
}

}  // namespace netkf
