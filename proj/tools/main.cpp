#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netkf/csv.hpp"
#include "netkf/diagnostics.hpp"
#include "netkf/scenario.hpp"
#include "netkf/simulation.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_cost_table(const netkf::MonteCarloResult& mc) {
  std::cout << std::left << std::setw(10) << "filter" << std::right
            << std::setw(16) << "flops_total" << std::setw(14) << "normalized"
            << std::setw(18) << "wall_normalized" << "\n";
  double ekf_wall = 0.0;
  for (std::size_t i = 0; i < mc.filter_names.size(); ++i) {
    if (mc.filter_names[i] == "ekf") ekf_wall = mc.wall_totals[i];
  }
  for (std::size_t i = 0; i < mc.filter_names.size(); ++i) {
    const double norm = netkf::normalized_flops(mc, mc.filter_names[i]);
    const double wall_norm =
        ekf_wall > 0.0 ? mc.wall_totals[i] / ekf_wall
                       : std::numeric_limits<double>::quiet_NaN();
    std::cout << std::left << std::setw(10) << mc.filter_names[i] << std::right
              << std::setw(16) << mc.flop_totals[i] << std::setw(14)
              << std::fixed << std::setprecision(2) << norm << std::setw(18)
              << wall_norm << std::defaultfloat << "\n";
  }
}

void print_rmse_summary(const netkf::MonteCarloResult& mc) {
  std::cout << std::left << std::setw(10) << "filter" << std::right
            << std::setw(12) << "rmse_x" << std::setw(12) << "rmse_y"
            << std::setw(12) << "rmse_theta" << "\n";
  for (const auto& name : mc.filter_names) {
    const auto rmse = netkf::steady_state_rmse(mc, name);
    std::cout << std::left << std::setw(10) << name << std::right
              << std::fixed << std::setprecision(5) << std::setw(12) << rmse[0]
              << std::setw(12) << rmse[1] << std::setw(12) << rmse[2]
              << std::defaultfloat << "\n";
  }
}

struct SimulateArgs {
  std::string scenario;
  std::string out_dir = "out";
  std::string filters;
  long runs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
};

netkf::ScenarioConfig configure(const SimulateArgs& args) {
  netkf::ScenarioConfig cfg = netkf::resolve_scenario(args.scenario);
  if (args.runs > 0) cfg.runs = args.runs;
  if (args.seed_set) cfg.master_seed = args.seed;
  if (!args.filters.empty()) cfg.filters = split_csv_list(args.filters);
  netkf::validate_scenario(cfg);
  return cfg;
}

int run_simulate(const SimulateArgs& args) {
  const netkf::ScenarioConfig cfg = configure(args);
  std::cout << "scenario " << cfg.name << ": " << cfg.runs << " runs x "
            << cfg.length << " ticks, steady-state RMSE over the final half\n";
  const netkf::MonteCarloResult mc = netkf::run_monte_carlo(cfg, args.threads);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  netkf::write_trajectory_csv((out / "trajectory.csv").string(), mc);
  netkf::write_rmse_csv((out / "rmse.csv").string(), mc);
  netkf::write_cost_csv((out / "cost.csv").string(), mc);

  print_rmse_summary(mc);
  std::cout << "\n";
  print_cost_table(mc);
  std::cout << "\nwrote " << (out / "trajectory.csv").string() << ", "
            << (out / "rmse.csv").string() << ", "
            << (out / "cost.csv").string() << "\n";
  return 0;
}

int run_flops(const SimulateArgs& args) {
  const netkf::ScenarioConfig cfg = configure(args);
  std::cout << "scenario " << cfg.name << ": " << cfg.runs << " runs x "
            << cfg.length << " ticks\n";
  const netkf::MonteCarloResult mc = netkf::run_monte_carlo(cfg, args.threads);
  print_cost_table(mc);
  return 0;
}

int run_oracle_check(std::uint64_t seed) {
  bool all_passed = true;
  auto report = [&](const std::vector<netkf::CheckResult>& results) {
    for (const auto& r : results) {
      std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name << " ("
                << r.detail << ")\n";
      all_passed = all_passed && r.passed;
    }
  };
  report(netkf::gain_optimality_suite(seed));
  report(netkf::linear_equivalence_suite(seed));
  return all_passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked-robot state estimation: simulation and checks"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Run a Monte Carlo scenario and write CSV results");
  sim->add_option("--scenario", sim_args.scenario,
                  "Built-in name (sim1, sim2, local, vpn) or config file path")
      ->required();
  sim->add_option("--runs", sim_args.runs, "Override the scenario run count");
  CLI::Option* sim_seed =
      sim->add_option("--seed", sim_args.seed, "Override the master seed");
  sim->add_option("--filters", sim_args.filters,
                  "Comma-separated filter list (poekf, ekf, refilter, oracle)");
  sim->add_option("--out", sim_args.out_dir,
                  "Output directory for the CSV files");
  sim->add_option("--threads", sim_args.threads,
                  "Worker threads (0 = hardware concurrency)");

  std::uint64_t oracle_seed = 20270405ull;
  CLI::App* oracle = app.add_subcommand(
      "oracle-check",
      "Run the gain-optimality and linear-equivalence suites");
  oracle->add_option("--seed", oracle_seed, "Randomized-instance seed");

  SimulateArgs flop_args;
  CLI::App* flops = app.add_subcommand(
      "flops", "Run a scenario and print the normalized cost table");
  flops->add_option("--scenario", flop_args.scenario,
                    "Built-in name or config file path")
      ->required();
  flops->add_option("--runs", flop_args.runs,
                    "Override the scenario run count");
  CLI::Option* flop_seed =
      flops->add_option("--seed", flop_args.seed, "Override the master seed");
  flops->add_option("--threads", flop_args.threads,
                    "Worker threads (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  sim_args.seed_set = sim_seed->count() > 0;
  flop_args.seed_set = flop_seed->count() > 0;

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (oracle->parsed()) return run_oracle_check(oracle_seed);
    if (flops->parsed()) return run_flops(flop_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
