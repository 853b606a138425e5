#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relayauction/best_response.hpp"
#include "relayauction/experiment.hpp"

namespace ra = relayauction;

namespace {

constexpr int kExitInvalidInput = 3;

void print_matrix(const char* label, const Eigen::MatrixXd& m) {
  std::printf("%s\n", label);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::printf(" ");
    for (Eigen::Index c = 0; c < m.cols(); ++c) std::printf(" %.8g", m(r, c));
    std::printf("\n");
  }
}

void print_report(const ra::RunReport& rep) {
  std::printf("converged: %s after %d slots\n", rep.converged ? "yes" : "no", rep.slots_used);
  print_matrix("final bids (user x relay):", rep.final_bids);
  print_matrix("final powers (relay x user):", rep.final_allocation.powers);
  std::printf("payoffs:");
  for (Eigen::Index i = 0; i < rep.final_allocation.payoffs.size(); ++i)
    std::printf(" %.8g", rep.final_allocation.payoffs(i));
  std::printf("\n");

  if (rep.equilibrium_checked)
    std::printf("equilibrium check: %s (worst improvement %.3g, eps %.3g)\n",
                rep.equilibrium.is_equilibrium ? "pass" : "FAIL",
                rep.equilibrium.worst_improvement, rep.equilibrium.eps);
  if (rep.fairness_checked) {
    std::printf("fairness check: %s\n", rep.fairness.pass ? "pass" : "FAIL");
    for (const auto& rf : rep.fairness.relays) {
      if (!rf.has_active_users) {
        std::printf("  relay %d: no active users (excluded)\n", rf.relay);
        continue;
      }
      std::printf("  relay %d: utilization %.6f, max residual %.3g\n", rf.relay, rf.utilization,
                  rf.residuals.size() ? rf.residuals.maxCoeff() : 0.0);
    }
  }
  if (rep.efficiency_checked)
    std::printf("efficiency check: grid %d, optimal %.8g, candidate %.8g, gap %.3g\n",
                rep.efficiency.grid_resolution, rep.efficiency.optimal_value,
                rep.efficiency.candidate_value, rep.efficiency.gap);
  if (!rep.csv_path.empty()) std::printf("trajectory: %s\n", rep.csv_path.c_str());
  if (!rep.report_path.empty()) std::printf("report: %s\n", rep.report_path.c_str());
}

struct CommonOptions {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> max_slots;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--scenario", opts.scenario_path, "Scenario file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&opts](const std::uint64_t& v) { opts.seed = v; },
      "Override the schedule RNG seed");
  cmd->add_option_function<double>(
      "--tol", [&opts](const double& v) { opts.tol = v; }, "Override the convergence tolerance");
  cmd->add_option_function<int>(
      "--max-slots", [&opts](const int& v) { opts.max_slots = v; },
      "Override the slot budget");
}

ra::RunSettings make_settings(const CommonOptions& opts) {
  ra::RunSettings settings;
  settings.loaded = ra::load_scenario(opts.scenario_path);
  settings.seed_override = opts.seed;
  settings.tol_override = opts.tol;
  settings.max_slots_override = opts.max_slots;
  return settings;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Share-auction relay power allocation: dynamics, sweeps and certification"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string run_out = "out";
  std::vector<std::string> run_checks;
  int run_grid = 0;
  CLI::App* cmd_run = app.add_subcommand("run", "Run the bid dynamics for one scenario");
  add_common(cmd_run, run_opts);
  cmd_run->add_option("--out", run_out, "Output directory for trajectory.csv and report.json");
  cmd_run->add_option("--check", run_checks, "Oracle checks to apply: ne, fairness, efficiency")
      ->check(CLI::IsMember({"ne", "fairness", "efficiency"}));
  cmd_run->add_option("--grid", run_grid, "Efficiency grid resolution (0 = automatic)");

  CommonOptions sweep_opts;
  int sweep_relay = 0;
  double sweep_min = 0.0, sweep_max = 0.0;
  int sweep_points = 25;
  std::string sweep_out;
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Sweep one relay's price over a grid");
  add_common(cmd_sweep, sweep_opts);
  cmd_sweep->add_option("--relay", sweep_relay, "Relay whose price is swept");
  cmd_sweep->add_option("--min", sweep_min, "Lowest price")->required();
  cmd_sweep->add_option("--max", sweep_max, "Highest price")->required();
  cmd_sweep->add_option("--points", sweep_points, "Grid size")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--out", sweep_out, "Optional CSV path for the sweep table");

  CommonOptions thr_opts;
  CLI::App* cmd_thr =
      app.add_subcommand("thresholds", "Print per-relay threshold prices for a scenario");
  add_common(cmd_thr, thr_opts);

  CommonOptions verify_opts;
  int verify_grid = 0;
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "Run the dynamics and certify the outcome with every applicable oracle");
  add_common(cmd_verify, verify_opts);
  cmd_verify->add_option("--grid", verify_grid, "Efficiency grid resolution (0 = automatic)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      ra::RunSettings settings = make_settings(run_opts);
      settings.out_dir = run_out;
      settings.efficiency_grid = run_grid;
      for (const auto& c : run_checks) {
        if (c == "ne") settings.checks.equilibrium = true;
        if (c == "fairness") settings.checks.fairness = true;
        if (c == "efficiency") settings.checks.efficiency = true;
      }
      const ra::RunReport rep = ra::run_experiment(settings);
      print_report(rep);
      return rep.exit_code();
    }

    if (cmd_sweep->parsed()) {
      ra::RunSettings settings = make_settings(sweep_opts);
      if (!(sweep_max > sweep_min) || !(sweep_min > 0.0)) {
        std::cerr << "sweep: need 0 < --min < --max\n";
        return kExitInvalidInput;
      }
      std::vector<double> grid(sweep_points);
      for (int i = 0; i < sweep_points; ++i)
        grid[i] = sweep_points == 1
                      ? sweep_min
                      : sweep_min + (sweep_max - sweep_min) * i / (sweep_points - 1);
      const ra::SweepResult res = ra::sweep_prices(settings.loaded, sweep_relay, grid);

      std::printf("%-14s %-12s %-10s %s\n", "price", "demand", "converged", "utilization");
      for (const auto& p : res.points)
        std::printf("%-14.8g %-12.8g %-10s %.8g\n", p.price, p.demand,
                    p.converged ? "yes" : "no", p.utilization);
      std::printf("threshold (bisection): %.10g\n", res.threshold_bisection);
      if (res.has_bracket)
        std::printf("threshold bracket from sweep: [%.10g, %.10g]\n", res.bracket_lower,
                    res.bracket_upper);
      else
        std::printf("threshold bracket from sweep: not crossed inside the grid\n");

      if (!sweep_out.empty()) {
        std::ofstream out(sweep_out);
        if (!out) throw std::runtime_error(sweep_out + ": cannot open for writing");
        out << "price,demand,converged,utilization\n";
        char buf[160];
        for (const auto& p : res.points) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g\n", p.price, p.demand,
                        p.converged ? 1 : 0, p.utilization);
          out << buf;
        }
      }
      return 0;
    }

    if (cmd_thr->parsed()) {
      const ra::RunSettings settings = make_settings(thr_opts);
      const ra::Scenario& sc = settings.loaded.scenario;
      for (int k = 0; k < sc.num_relays(); ++k) {
        const double th = ra::relay_threshold_price(sc, k, settings.loaded.kind);
        std::printf("relay %d: threshold price %.10g\n", k, th);
        if (settings.loaded.kind == ra::AuctionKind::SnrAuction)
          for (int i = 0; i < sc.num_users(); ++i)
            std::printf("  user %d: full-demand below %.10g, opts out above %.10g\n", i,
                        ra::snr_lower_threshold(sc, i, k), ra::snr_upper_threshold(sc, i, k));
      }
      return 0;
    }

    if (cmd_verify->parsed()) {
      ra::RunSettings settings = make_settings(verify_opts);
      settings.checks.equilibrium = true;
      settings.checks.fairness = true;
      const int dims =
          settings.loaded.scenario.num_users() * settings.loaded.scenario.num_relays();
      settings.efficiency_grid = verify_grid;
      settings.checks.efficiency = dims <= 6 || verify_grid > 0;
      const ra::RunReport rep = ra::run_experiment(settings);
      print_report(rep);
      if (!settings.checks.efficiency)
        std::printf("efficiency check skipped: %d power dimensions need an explicit --grid\n",
                    dims);
      return rep.exit_code();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return 0;
}
