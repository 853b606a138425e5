#pragma once

#include <string>
#include <vector>

#include "relayauction/auction.hpp"
#include "relayauction/channel.hpp"

namespace relayauction {

/// Result of the grid + refinement payoff search for one user.
struct OracleBestResponse {
  Eigen::VectorXd bids;    // length K, bid row inducing `powers`
  Eigen::VectorXd powers;  // length K, the user's power from each relay
  double payoff = 0.0;     // never below 0; bidding nothing is always available
};

/// Maximizes user `user`'s payoff over its own bid row with everyone else's
/// bids fixed, without using the closed-form responses under test. Searches
/// the reachable power box directly: an exhaustive grid (grid points per
/// axis) when the relay count is at most 3, then golden-section refinement
/// of each coordinate inside one grid step. With more than 3 relays the
/// grid stage is skipped and refinement starts from power_best_response,
/// which weakens the independence guarantee.
OracleBestResponse numeric_payoff_maximizer(const Scenario& sc, AuctionKind kind,
                                            const PriceVector& pv, int user,
                                            const BidProfile& bids, int grid = 33,
                                            double bid_ceiling = 1e6);

/// Sum over users of rate_increase at the given K x I power matrix.
double total_rate_increase(const Scenario& sc, const Eigen::MatrixXd& powers);

struct EfficiencyReport {
  Eigen::MatrixXd optimal_powers;  // K x I, best grid point found
  double optimal_value = 0.0;      // total rate increase there
  double candidate_value = 0.0;    // total rate increase at the candidate
  double gap = 0.0;                // optimal_value - candidate_value
  int grid_resolution = 0;
};

/// Exhaustive search of the social optimum over discretized power splits:
/// each relay's budget is cut into grid_resolution levels and every split
/// across users with total at most the budget is tried. Resolution 0 picks
/// 101 for up to 3 power dimensions (users x relays) and 33 for up to 6;
/// larger instances must pass an explicit resolution, and the total grid
/// is capped at 1e8 points. Ties go to the lexicographically first split.
EfficiencyReport brute_force_efficiency(const Scenario& sc,
                                        const Eigen::MatrixXd& candidate_powers,
                                        int grid_resolution = 0);

/// Fairness diagnostics for one relay.
struct RelayFairness {
  int relay = -1;
  std::vector<int> active_users;    // powers above the activity threshold
  Eigen::VectorXd marginals;        // d(rate increase)/d(SNR increment), per active user
  double implied_constant = 0.0;    // priority-weighted mean of marginal/priority
  Eigen::VectorXd residuals;        // relative deviation of marginal/priority from the constant
  double utilization = 0.0;         // fraction of the relay budget spent
  bool has_active_users = false;
  bool pass = false;
};

struct FairnessReport {
  std::vector<RelayFairness> relays;
  bool pass = false;    // all relays with active users pass and at least one has any
  std::string notice;   // names relays excluded for having no active users
};

/// Checks the proportional-fairness condition at an allocation: on every
/// relay with active users, marginal/priority must agree across those users
/// (relative residuals below tol) and the relay budget must be spent up to
/// a 1 - tol_util fraction. Relays with nobody active are excluded from
/// the pass condition and reported in the notice.
FairnessReport fairness_check(const Scenario& sc, const Eigen::MatrixXd& powers,
                              double tol = 1e-3, double tol_util = 1e-3);

/// d(rate_increase)/d(SNR increment from relay `relay`) at the given power
/// column: W / ((m+1) ln2 (1 + direct SNR + total SNR increment)), with m
/// the count of relays above the activity threshold. The value is the same
/// for every relay the user draws power from.
double marginal_utility(const Scenario& sc, int user, int relay,
                        const Eigen::VectorXd& relay_powers);

}  // namespace relayauction
