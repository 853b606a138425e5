#include "relayauction/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "relayauction/best_response.hpp"

namespace relayauction {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Synchronous:
      return "synchronous";
    case ScheduleKind::Bernoulli:
      return "bernoulli";
    case ScheduleKind::RoundRobin:
      return "round_robin";
    case ScheduleKind::ExplicitSets:
      return "explicit_sets";
  }
  return "unknown";
}

void Schedule::validate() const {
  if (num_users < 1) throw std::invalid_argument("schedule.num_users: must be >= 1");
  if (asynchronism_bound < 1)
    throw std::invalid_argument("schedule.asynchronism_bound: must be >= 1");

  switch (kind) {
    case ScheduleKind::Synchronous:
      break;
    case ScheduleKind::RoundRobin:
      if (asynchronism_bound < num_users)
        throw std::invalid_argument(
            "schedule.asynchronism_bound: round robin needs at least one full cycle (>= "
            "num_users)");
      break;
    case ScheduleKind::Bernoulli: {
      if (activation_probabilities.size() != num_users)
        throw std::invalid_argument(
            "schedule.activation_probabilities: length must equal num_users");
      for (int i = 0; i < num_users; ++i) {
        const double p = activation_probabilities(i);
        if (!(p > 0.0) || p > 1.0)
          throw std::invalid_argument(
              "schedule.activation_probabilities: entries must lie in (0, 1]");
      }
      break;
    }
    case ScheduleKind::ExplicitSets: {
      if (update_sets.empty())
        throw std::invalid_argument("schedule.update_sets: pattern must be nonempty");
      const int period = static_cast<int>(update_sets.size());
      std::vector<std::vector<int>> slots_of(num_users);
      for (int t = 0; t < period; ++t) {
        std::vector<bool> seen(num_users, false);
        for (int i : update_sets[t]) {
          if (i < 0 || i >= num_users)
            throw std::invalid_argument("schedule.update_sets: user index out of range");
          if (seen[i])
            throw std::invalid_argument("schedule.update_sets: duplicate user within one slot");
          seen[i] = true;
          slots_of[i].push_back(t);
        }
      }
      // the pattern repeats forever, so gaps wrap around the period
      for (int i = 0; i < num_users; ++i) {
        const auto& slots = slots_of[i];
        if (slots.empty())
          throw std::invalid_argument("schedule.update_sets: every user must appear");
        int max_gap = slots.front() + period - slots.back();
        for (std::size_t j = 1; j < slots.size(); ++j)
          max_gap = std::max(max_gap, slots[j] - slots[j - 1]);
        if (max_gap > asynchronism_bound)
          throw std::invalid_argument(
              "schedule.update_sets: a user's update gap exceeds asynchronism_bound");
      }
      break;
    }
  }
}

Schedule make_schedule(ScheduleKind kind, int num_users, int asynchronism_bound,
                       std::uint64_t seed) {
  Schedule s;
  s.kind = kind;
  s.num_users = num_users;
  s.rng_seed = seed;
  switch (kind) {
    case ScheduleKind::Synchronous:
      s.asynchronism_bound = asynchronism_bound > 0 ? asynchronism_bound : 1;
      break;
    case ScheduleKind::RoundRobin:
      s.asynchronism_bound = asynchronism_bound > 0 ? asynchronism_bound : num_users;
      break;
    case ScheduleKind::Bernoulli:
      throw std::invalid_argument(
          "kind: Bernoulli needs activation probabilities; use make_bernoulli_schedule");
    case ScheduleKind::ExplicitSets:
      throw std::invalid_argument(
          "kind: ExplicitSets needs update sets; use make_explicit_schedule");
  }
  s.validate();
  return s;
}

Schedule make_bernoulli_schedule(int num_users, const Eigen::VectorXd& activation_probabilities,
                                 int asynchronism_bound, std::uint64_t seed) {
  Schedule s;
  s.kind = ScheduleKind::Bernoulli;
  s.num_users = num_users;
  s.asynchronism_bound = asynchronism_bound;
  s.rng_seed = seed;
  s.activation_probabilities = activation_probabilities;
  s.validate();
  return s;
}

Schedule make_bernoulli_schedule(int num_users, double activation_probability,
                                 int asynchronism_bound, std::uint64_t seed) {
  return make_bernoulli_schedule(
      num_users, Eigen::VectorXd::Constant(num_users, activation_probability),
      asynchronism_bound, seed);
}

Schedule make_explicit_schedule(int num_users, std::vector<std::vector<int>> update_sets,
                                int asynchronism_bound) {
  Schedule s;
  s.kind = ScheduleKind::ExplicitSets;
  s.num_users = num_users;
  s.asynchronism_bound = asynchronism_bound;
  s.update_sets = std::move(update_sets);
  s.validate();
  return s;
}

Bounds Bounds::uniform(int num_users, int num_relays, double lower_bid, double upper_bid) {
  Bounds b;
  b.lower = Eigen::MatrixXd::Constant(num_users, num_relays, lower_bid);
  b.upper = Eigen::MatrixXd::Constant(num_users, num_relays, upper_bid);
  b.validate(num_users, num_relays);
  return b;
}

void Bounds::validate(int num_users, int num_relays) const {
  if (lower.rows() != num_users || lower.cols() != num_relays)
    throw std::invalid_argument("bounds.lower: dimensions must be num_users x num_relays");
  if (upper.rows() != num_users || upper.cols() != num_relays)
    throw std::invalid_argument("bounds.upper: dimensions must be num_users x num_relays");
  for (int i = 0; i < num_users; ++i)
    for (int k = 0; k < num_relays; ++k) {
      if (!(lower(i, k) > 0.0) || !std::isfinite(lower(i, k)))
        throw std::invalid_argument("bounds.lower: entries must be finite and > 0");
      if (!std::isfinite(upper(i, k)) || upper(i, k) < lower(i, k))
        throw std::invalid_argument("bounds.upper: entries must be finite and >= lower");
    }
}

Trajectory run(const Scenario& sc, AuctionKind kind, const PriceVector& pv,
               const Schedule& schedule, const Bounds& bounds,
               const std::optional<BidProfile>& init, double tol, int max_slots) {
  sc.validate();
  const int I = sc.num_users();
  const int K = sc.num_relays();
  pv.validate(K);
  schedule.validate();
  if (schedule.num_users != I)
    throw std::invalid_argument("schedule.num_users: must match the scenario");
  bounds.validate(I, K);
  if (!(tol > 0.0) || !std::isfinite(tol)) throw std::invalid_argument("tol: must be finite and > 0");
  if (max_slots < 1) throw std::invalid_argument("max_slots: must be >= 1");

  std::mt19937_64 rng(schedule.rng_seed);

  BidProfile current(I, K);
  if (init.has_value()) {
    validate_bids(sc, *init);
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k)
        if ((*init)(i, k) < bounds.lower(i, k) || (*init)(i, k) > bounds.upper(i, k))
          throw std::invalid_argument("init: entry outside bounds");
    current = *init;
  } else {
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k) {
        std::uniform_real_distribution<double> dist(bounds.lower(i, k), bounds.upper(i, k));
        current(i, k) = dist(rng);
      }
  }

  BestResponseOptions br_opts;
  br_opts.bid_ceiling = std::max(br_opts.bid_ceiling, bounds.upper.maxCoeff());

  const auto respond = [&](int user, const BidProfile& profile) {
    return kind == AuctionKind::SnrAuction ? snr_best_response(sc, pv, user, profile, br_opts)
                                           : power_best_response(sc, pv, user, profile, br_opts);
  };

  Trajectory traj;
  traj.bids.push_back(current);
  traj.payoffs.push_back(evaluate_allocation(sc, kind, pv, current).payoffs);
  traj.updated.emplace_back();

  const double tol_abs = tol * bounds.upper.maxCoeff();
  const int B = schedule.asynchronism_bound;
  std::vector<int> last_update(I, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int quiet_streak = 0;

  for (int t = 1; t <= max_slots; ++t) {
    const BidProfile& prev = traj.bids.back();
    BidProfile next = prev;
    std::vector<int> active;

    for (int i = 0; i < I; ++i) {
      bool on = false;
      switch (schedule.kind) {
        case ScheduleKind::Synchronous:
          on = true;
          break;
        case ScheduleKind::RoundRobin:
          on = (t - 1) % I == i;
          break;
        case ScheduleKind::Bernoulli: {
          // one draw per user per slot, even when the bound forces the
          // update, so trajectories stay seed-reproducible
          const double draw = unit(rng);
          on = draw < schedule.activation_probabilities(i) || t - last_update[i] >= B;
          break;
        }
        case ScheduleKind::ExplicitSets: {
          const auto& set = schedule.update_sets[(t - 1) % schedule.update_sets.size()];
          on = std::find(set.begin(), set.end(), i) != set.end();
          break;
        }
      }
      if (!on) continue;
      Eigen::VectorXd row = respond(i, prev);
      for (int k = 0; k < K; ++k)
        row(k) = std::clamp(row(k), bounds.lower(i, k), bounds.upper(i, k));
      next.row(i) = row.transpose();
      active.push_back(i);
      last_update[i] = t;
    }

    const double change = (next - prev).cwiseAbs().maxCoeff();
    traj.bids.push_back(std::move(next));
    traj.payoffs.push_back(evaluate_allocation(sc, kind, pv, traj.bids.back()).payoffs);
    traj.updated.push_back(std::move(active));
    traj.slots_used = t;

    quiet_streak = change < tol_abs ? quiet_streak + 1 : 0;
    if (quiet_streak >= B) {
      traj.converged = true;
      break;
    }
  }

  traj.final_bids = traj.bids.back();
  return traj;
}

}  // namespace relayauction
