#pragma once

#include <vector>

#include "relayauction/auction.hpp"
#include "relayauction/channel.hpp"

namespace relayauction {

/// Threshold structure of the SNR-auction best-response coefficient for one
/// (user, relay) pair at one price.
///
/// Below the lower threshold the user wants the relay's entire power
/// (coefficient +inf); above the upper threshold it opts out (coefficient 0);
/// in between the coefficient is a finite, nonincreasing closed form. When
/// the upper threshold does not exceed the lower one the interior branch is
/// empty (degenerate): +inf below the upper threshold, 0 at or above it.
/// A pair whose relay path is dead (zero gain) reports both thresholds 0 and
/// a coefficient identically 0.
struct SnrCoefficient {
  double value = 0.0;            // may be +infinity
  double lower_threshold = 0.0;  // full-demand price
  double upper_threshold = 0.0;  // opt-out price
  bool degenerate = false;
};

struct BestResponseOptions {
  double bid_ceiling = 1e6;        // stands in for infinite bids
  int max_relays_enumerated = 12;  // cap on 2^K subset enumeration
  double inner_tol = 1e-9;         // line-search x tolerance, relative to the power range
  int max_sweeps = 200;            // coordinate-ascent sweeps for the inner solver
};

/// Price at which the user's demand on this relay reaches the relay's
/// entire power: marginal utility of the last unit of SNR when relay
/// `relay` spends all of P_r on the user.
double snr_lower_threshold(const Scenario& sc, int user, int relay);

/// Opt-out price: smallest positive root of the indifference equation
/// between using the relay optimally and not using it at all. Located by
/// bracketing and bisection; throws if no sign change can be found.
double snr_upper_threshold(const Scenario& sc, int user, int relay);

/// Full threshold policy evaluation at one price (price > 0 required).
SnrCoefficient snr_coefficient(const Scenario& sc, int user, int relay, double price);

/// Best response in the SNR auction: at most one nonzero component, at the
/// relay minimizing price * priority (ties to the lowest relay index). The
/// nonzero bid is coefficient * (opponents' bids + reserve); an infinite
/// coefficient bids the ceiling. Row `user` of `bids` is ignored.
Eigen::VectorXd snr_best_response(const Scenario& sc, const PriceVector& pv, int user,
                                  const BidProfile& bids, const BestResponseOptions& opts = {});

/// One enumerated relay-subset case of the power-auction best response.
struct RelayChoiceCase {
  std::vector<int> subset;       // relay indices with positive power
  Eigen::VectorXd coefficients;  // per-relay linear coefficients, zero off the subset
  Eigen::VectorXd powers;        // inner-optimal powers, zero off the subset
  double rate_gain = 0.0;        // rate increase at the case optimum
  double payoff = 0.0;           // case objective value (0 for the empty subset)
};

/// All 2^K relay-choice cases for one user in the power auction, ordered by
/// subset size then lexicographically. Each case fixes the set of relays in
/// use and maximizes the resulting concave payoff over the reachable powers.
std::vector<RelayChoiceCase> power_response_cases(const Scenario& sc, const PriceVector& pv,
                                                  int user, const BidProfile& bids,
                                                  const BestResponseOptions& opts = {});

/// Best response in the power auction: the bid row of the best case. Ties
/// resolve toward the earlier (smaller) subset. Row `user` of `bids` is
/// ignored. Throws if the relay count exceeds the enumeration cap.
Eigen::VectorXd power_best_response(const Scenario& sc, const PriceVector& pv, int user,
                                    const BidProfile& bids, const BestResponseOptions& opts = {});

/// Aggregate demand D(price) for one relay: sum over users of
/// f/(f+1), the fraction of the relay's power each user would claim at a
/// bid fixed point. SNR auction: f from the closed-form coefficient.
/// Power auction: f from the numeric single-relay optimum with every other
/// relay priced out.
double aggregate_demand(const Scenario& sc, int relay, AuctionKind kind, double price);

/// Price where aggregate demand crosses 1 (demand >= 1 at or below, < 1
/// above), found by bisection to 1e-8 relative tolerance. Returns 0 when
/// demand stays below 1 at every positive price.
double relay_threshold_price(const Scenario& sc, int relay, AuctionKind kind);

}  // namespace relayauction
