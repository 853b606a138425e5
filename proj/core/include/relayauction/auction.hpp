#pragma once

#include <Eigen/Dense>

#include "relayauction/channel.hpp"

namespace relayauction {

/// Payment rule. Both auctions share bids, allocation and payoffs; they
/// differ only in what a user is charged for.
enum class AuctionKind {
  SnrAuction,   // pay price * priority per unit of SNR increase
  PowerAuction  // pay price per watt of allocated relay power
};

const char* to_string(AuctionKind kind);

/// I x K matrix of nonnegative bids, one row per user.
using BidProfile = Eigen::MatrixXd;

/// Throws std::invalid_argument if the profile is not a valid bid matrix
/// for the scenario.
void validate_bids(const Scenario& sc, const BidProfile& bids);

/// Relay-side auction parameters announced before bidding starts.
struct PriceVector {
  Eigen::VectorXd prices;        // length K, entries > 0
  Eigen::VectorXd reserve_bids;  // length K, entries > 0

  static PriceVector uniform(int num_relays, double price, double reserve_bid = 1.0);
  void validate(int num_relays) const;
};

/// Outcome of evaluating one bid profile: realized powers and the derived
/// per-user quantities.
struct Allocation {
  Eigen::MatrixXd powers;    // K x I, powers(k,i) = relay k's power spent on user i
  Eigen::VectorXd rates;     // length I, rate at the allocation
  Eigen::VectorXd payments;  // length I
  Eigen::VectorXd payoffs;   // length I, rate increase minus payment
};

/// Proportional share rule: powers(k,i) = b_ik / (sum_j b_jk + beta_k) * P_rk.
/// All-zero bids give all-zero powers; totals stay strictly below P_rk.
Eigen::MatrixXd allocate(const Scenario& sc, const PriceVector& pv, const BidProfile& bids);

/// Charge for user `user` at the given powers (a K x I matrix as returned
/// by allocate).
double payment(const Scenario& sc, AuctionKind kind, const PriceVector& pv, int user,
               const Eigen::MatrixXd& powers);

/// Same charge computed from the user's own power column only.
double payment_from_powers(const Scenario& sc, AuctionKind kind, const PriceVector& pv, int user,
                           const Eigen::VectorXd& user_powers);

/// U_i = rate_increase - payment at the allocation induced by `bids`.
/// A user whose bid row is all zero has payoff exactly 0.
double payoff(const Scenario& sc, AuctionKind kind, const PriceVector& pv, const BidProfile& bids,
              int user);

/// U_i evaluated directly from a candidate power column for user `user`,
/// bypassing the bid-to-power map.
double payoff_from_powers(const Scenario& sc, AuctionKind kind, const PriceVector& pv, int user,
                          const Eigen::VectorXd& user_powers);

/// Full evaluation of one profile: powers, rates, payments, payoffs.
Allocation evaluate_allocation(const Scenario& sc, AuctionKind kind, const PriceVector& pv,
                               const BidProfile& bids);

/// Per-user result of the unilateral-deviation search.
struct DeviationReport {
  bool is_equilibrium = false;
  double eps = 0.0;
  Eigen::VectorXd improvements;   // best payoff gain found per user (may be ~0 or negative)
  int worst_user = -1;
  double worst_improvement = 0.0;
  Eigen::VectorXd worst_bid_row;  // the improving deviation for worst_user
};

/// Checks the equilibrium condition by searching each user's unilateral
/// deviations with the independent numeric maximizer (see oracles.hpp);
/// passes iff no user can improve by more than eps. Deviations are searched
/// over bids in [0, bid_ceiling].
DeviationReport is_epsilon_ne(const Scenario& sc, AuctionKind kind, const PriceVector& pv,
                              const BidProfile& bids, double eps, int deviation_grid = 33,
                              double bid_ceiling = 1e6);

}  // namespace relayauction
