#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "relayauction/auction.hpp"
#include "relayauction/channel.hpp"

namespace relayauction {

enum class ScheduleKind { Synchronous, Bernoulli, RoundRobin, ExplicitSets };

const char* to_string(ScheduleKind kind);

/// Which users revise their bid at which slots. Every schedule must let
/// each user update at least once in any window of `asynchronism_bound`
/// consecutive slots; Bernoulli schedules enforce this by forcing an
/// update once a user has been idle that long.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Synchronous;
  int num_users = 0;
  int asynchronism_bound = 1;  // B
  std::uint64_t rng_seed = 0;  // drives Bernoulli activation draws and random init

  /// Bernoulli only: per-user activation probabilities in (0, 1].
  Eigen::VectorXd activation_probabilities;

  /// ExplicitSets only: repeating pattern of update sets. Slot t uses
  /// pattern[(t-1) % pattern.size()].
  std::vector<std::vector<int>> update_sets;

  void validate() const;
};

/// Factory for the parameter-free kinds. RoundRobin defaults its bound to
/// the user count (the smallest valid value). Bernoulli and ExplicitSets
/// need extra data; use their dedicated factories.
Schedule make_schedule(ScheduleKind kind, int num_users, int asynchronism_bound = 0,
                       std::uint64_t seed = 0);

Schedule make_bernoulli_schedule(int num_users, const Eigen::VectorXd& activation_probabilities,
                                 int asynchronism_bound, std::uint64_t seed = 0);

/// Convenience: one shared activation probability.
Schedule make_bernoulli_schedule(int num_users, double activation_probability,
                                 int asynchronism_bound, std::uint64_t seed = 0);

Schedule make_explicit_schedule(int num_users, std::vector<std::vector<int>> update_sets,
                                int asynchronism_bound);

/// Per-entry bid box the updates are projected into.
struct Bounds {
  Eigen::MatrixXd lower;  // I x K, entries > 0
  Eigen::MatrixXd upper;  // I x K, finite, >= lower

  static Bounds uniform(int num_users, int num_relays, double lower_bid = 1e-9,
                        double upper_bid = 1e6);
  void validate(int num_users, int num_relays) const;
};

struct Trajectory {
  std::vector<BidProfile> bids;           // bids[t] after slot t; bids[0] is the init
  std::vector<Eigen::VectorXd> payoffs;   // per-user payoffs at bids[t]
  std::vector<std::vector<int>> updated;  // users revised at slot t; updated[0] is empty
  bool converged = false;
  int slots_used = 0;  // number of update slots executed
  BidProfile final_bids;
};

/// Runs the projected best-response iteration. Each slot, every scheduled
/// user replaces its bid row with its best response to the previous slot's
/// profile, clipped into the bounds. Convergence is declared once the
/// max-norm slot-to-slot change stays below tol * max(upper bound) for
/// asynchronism_bound consecutive slots. Hitting max_slots without that is
/// reported through the converged flag, not an exception.
///
/// init: a starting profile inside the bounds, or std::nullopt to draw one
/// uniformly from the bound box using the schedule's seed.
Trajectory run(const Scenario& sc, AuctionKind kind, const PriceVector& pv,
               const Schedule& schedule, const Bounds& bounds,
               const std::optional<BidProfile>& init = std::nullopt, double tol = 1e-9,
               int max_slots = 100000);

}  // namespace relayauction
