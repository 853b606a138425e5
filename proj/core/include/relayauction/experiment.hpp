#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relayauction/dynamics.hpp"
#include "relayauction/oracles.hpp"
#include "relayauction/scenario_io.hpp"

namespace relayauction {

struct CheckRequest {
  bool equilibrium = false;
  bool fairness = false;
  bool efficiency = false;
};

struct RunSettings {
  LoadedScenario loaded;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> tol_override;
  std::optional<int> max_slots_override;
  CheckRequest checks;
  std::string out_dir;  // empty: no files written

  double ne_eps_scale = 1e-6;  // eps = scale * bandwidth
  int efficiency_grid = 0;     // 0: resolution chosen by instance size
  double fairness_tol = 1e-3;
};

struct RunReport {
  bool converged = false;
  int slots_used = 0;
  BidProfile final_bids;
  Allocation final_allocation;

  bool equilibrium_checked = false;
  DeviationReport equilibrium;
  bool fairness_checked = false;
  FairnessReport fairness;
  bool efficiency_checked = false;
  EfficiencyReport efficiency;

  std::string csv_path;     // set when a trajectory file was written
  std::string report_path;  // set when a report file was written

  /// 0 converged, 2 not converged, 4 converged but the equilibrium check
  /// failed. Input problems surface as exceptions, not codes.
  int exit_code() const;

  std::string to_json() const;
};

/// Runs the dynamics described by the settings, applies the requested
/// oracle checks to the converged profile, and, when out_dir is set,
/// writes trajectory.csv and report.json there.
RunReport run_experiment(const RunSettings& settings);

/// Writes one row per (user, relay) pair with a positive bid, per slot,
/// in slot-major, user-then-relay order. Header is exactly
/// slot,user,relay,bid,power,payoff; numbers are printed with enough
/// digits to round-trip exactly.
void write_trajectory_csv(const std::string& path, const Scenario& sc, AuctionKind kind,
                          const PriceVector& pv, const Trajectory& trajectory);

/// Dense per-slot view reconstructed from a trajectory CSV. Pairs missing
/// from a slot are zero bids.
struct CsvTrajectory {
  std::vector<int> slots;
  std::vector<BidProfile> bids;           // I x K per slot
  std::vector<Eigen::MatrixXd> powers;    // K x I per slot
  std::vector<Eigen::VectorXd> payoffs;   // length I per slot
};

CsvTrajectory read_trajectory_csv(const std::string& path, int num_users, int num_relays);

struct SweepPoint {
  double price = 0.0;
  double demand = 0.0;       // aggregate fixed-point demand at this price
  bool converged = false;
  double utilization = 0.0;  // spent fraction of the swept relay's budget
};

struct SweepResult {
  int relay = -1;
  std::vector<SweepPoint> points;       // ascending in price
  double threshold_bisection = 0.0;     // relay_threshold_price on the same instance
  bool has_bracket = false;             // demand crossed 1 inside the grid
  double bracket_lower = 0.0;           // last grid price with demand >= 1
  double bracket_upper = 0.0;           // first grid price with demand < 1
};

/// Replaces relay `relay`'s price with each grid value, runs the dynamics
/// at that price, and tabulates demand, convergence and utilization. Grid
/// points run in parallel; results are ordered by the grid.
SweepResult sweep_prices(const LoadedScenario& loaded, int relay,
                         const std::vector<double>& price_grid);

}  // namespace relayauction
