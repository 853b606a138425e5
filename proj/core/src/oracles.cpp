#include "relayauction/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "relayauction/best_response.hpp"
#include "relayauction/numeric.hpp"

namespace relayauction {

namespace {

void check_user(const Scenario& sc, int user) {
  if (user < 0 || user >= sc.num_users()) throw std::out_of_range("user: index out of range");
}

void check_relay(const Scenario& sc, int relay) {
  if (relay < 0 || relay >= sc.num_relays()) throw std::out_of_range("relay: index out of range");
}

void check_power_matrix(const Scenario& sc, const Eigen::MatrixXd& powers, const char* name) {
  if (powers.rows() != sc.num_relays() || powers.cols() != sc.num_users())
    throw std::invalid_argument(std::string(name) + ": dimensions must be relays x users");
  if (!powers.allFinite() || (powers.array() < 0.0).any())
    throw std::invalid_argument(std::string(name) + ": entries must be finite and >= 0");
  for (int k = 0; k < sc.num_relays(); ++k) {
    const double budget = sc.relays[k].total_power;
    if (powers.row(k).sum() > budget * (1.0 + 1e-9))
      throw std::invalid_argument(std::string(name) + ": relay budget exceeded");
  }
}

}  // namespace

OracleBestResponse numeric_payoff_maximizer(const Scenario& sc, AuctionKind kind,
                                            const PriceVector& pv, int user,
                                            const BidProfile& bids, int grid,
                                            double bid_ceiling) {
  sc.validate();
  check_user(sc, user);
  pv.validate(sc.num_relays());
  validate_bids(sc, bids);
  if (grid < 2) throw std::invalid_argument("grid: must be >= 2");
  if (!(bid_ceiling > 0.0) || !std::isfinite(bid_ceiling))
    throw std::invalid_argument("bid_ceiling: must be finite and > 0");

  const int K = sc.num_relays();
  Eigen::VectorXd opponents(K), p_max(K);
  for (int k = 0; k < K; ++k) {
    opponents(k) = bids.col(k).sum() - bids(user, k) + pv.reserve_bids(k);
    p_max(k) = sc.relays[k].total_power * bid_ceiling / (bid_ceiling + opponents(k));
  }

  const auto util = [&](const Eigen::VectorXd& p) {
    return payoff_from_powers(sc, kind, pv, user, p);
  };

  const double eps_act = sc.activity_threshold;
  const double gamma = direct_snr(sc, user);
  const double w = sc.bandwidth;
  const double base_rate = w * std::log2(1.0 + gamma);

  // payoff with the active-relay set pinned to `mask` and the rate term left
  // unclamped; smooth inside a branch, so line searches stay unimodal
  const auto branch_util = [&](unsigned mask, const Eigen::VectorXd& p) {
    double s = 0.0;
    double pay = 0.0;
    for (int k = 0; k < K; ++k) {
      if (!(mask & (1u << k))) continue;
      const double inc = relay_snr_increment(sc, user, k, p(k));
      s += inc;
      pay += kind == AuctionKind::SnrAuction ? pv.prices(k) * sc.priority(user, k) * inc
                                             : pv.prices(k) * p(k);
    }
    const int uses = std::popcount(mask) + 1;
    return w * std::log2(1.0 + gamma + s) / uses - base_rate - pay;
  };

  // coordinate ascent on the branch objective from a start point, stepping at
  // most one grid cell per move; the caller judges the result by true payoff
  const auto polish = [&](unsigned mask, Eigen::VectorXd p) {
    for (int k = 0; k < K; ++k)
      if (!(mask & (1u << k))) p(k) = 0.0;
    double cur = branch_util(mask, p);
    for (int sweep = 0; sweep < 40; ++sweep) {
      double moved = 0.0;
      for (int k = 0; k < K; ++k) {
        if (!(mask & (1u << k))) continue;
        const double step = p_max(k) / (grid - 1);
        const double lo = std::max(2.0 * eps_act, p(k) - step);
        const double hi = std::min(p_max(k), p(k) + step);
        if (!(hi > lo)) continue;
        const auto line = [&](double x) {
          Eigen::VectorXd q = p;
          q(k) = x;
          return branch_util(mask, q);
        };
        const ScalarMax m = golden_section_max(line, lo, hi, 1e-9 * p_max(k));
        if (m.value > cur) {
          moved = std::max(moved, std::abs(m.x - p(k)));
          cur = m.value;
          p(k) = m.x;
        }
      }
      if (moved <= 1e-12 * p_max.maxCoeff()) break;
    }
    return p;
  };

  Eigen::VectorXd best_p = Eigen::VectorXd::Zero(K);
  double best_u = 0.0;  // the all-zero bid row is always available

  if (K <= 3) {
    // dense scan keeps the best point of every active-relay branch; the
    // activity discontinuity blocks polish from crossing between branches
    const unsigned branches = 1u << K;
    std::vector<Eigen::VectorXd> champion(branches);
    std::vector<double> champion_u(branches, -std::numeric_limits<double>::infinity());
    std::int64_t total = 1;
    for (int k = 0; k < K; ++k) total *= grid;
    Eigen::VectorXd p(K);
    for (std::int64_t n = 0; n < total; ++n) {
      std::int64_t rem = n;
      unsigned mask = 0;
      for (int k = 0; k < K; ++k) {
        p(k) = p_max(k) * static_cast<double>(rem % grid) / (grid - 1);
        rem /= grid;
        if (p(k) > eps_act) mask |= 1u << k;
      }
      const double u = util(p);
      if (u > best_u) {
        best_u = u;
        best_p = p;
      }
      if (u > champion_u[mask]) {
        champion_u[mask] = u;
        champion[mask] = p;
      }
    }
    for (unsigned mask = 1; mask < branches; ++mask) {
      if (!std::isfinite(champion_u[mask])) continue;
      const Eigen::VectorXd cand = polish(mask, champion[mask]);
      const double u = util(cand);
      if (u > best_u) {
        best_u = u;
        best_p = cand;
      }
    }
  } else {
    BestResponseOptions br_opts;
    br_opts.bid_ceiling = bid_ceiling;
    const Eigen::VectorXd row = power_best_response(sc, pv, user, bids, br_opts);
    Eigen::VectorXd seed = Eigen::VectorXd::Zero(K);
    unsigned mask = 0;
    for (int k = 0; k < K; ++k) {
      seed(k) = sc.relays[k].total_power * row(k) / (row(k) + opponents(k));
      if (seed(k) > eps_act) mask |= 1u << k;
    }
    const double seed_u = util(seed);
    if (seed_u > best_u) {
      best_u = seed_u;
      best_p = seed;
    }
    if (mask != 0) {
      const Eigen::VectorXd cand = polish(mask, seed);
      const double u = util(cand);
      if (u > best_u) {
        best_u = u;
        best_p = cand;
      }
    }
  }

  OracleBestResponse out;
  out.powers = best_p;
  out.payoff = best_u;
  out.bids = Eigen::VectorXd::Zero(K);
  for (int k = 0; k < K; ++k) {
    if (best_p(k) <= 0.0) continue;
    const double pr = sc.relays[k].total_power;
    out.bids(k) = std::min(opponents(k) * best_p(k) / (pr - best_p(k)), bid_ceiling);
  }
  return out;
}

DeviationReport is_epsilon_ne(const Scenario& sc, AuctionKind kind, const PriceVector& pv,
                              const BidProfile& bids, double eps, int deviation_grid,
                              double bid_ceiling) {
  sc.validate();
  pv.validate(sc.num_relays());
  validate_bids(sc, bids);
  if (!(eps >= 0.0)) throw std::invalid_argument("eps: must be >= 0");

  const int I = sc.num_users();
  DeviationReport rep;
  rep.eps = eps;
  rep.improvements.resize(I);
  rep.worst_bid_row = Eigen::VectorXd::Zero(sc.num_relays());
  rep.worst_improvement = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < I; ++i) {
    const double here = payoff(sc, kind, pv, bids, i);
    const OracleBestResponse alt =
        numeric_payoff_maximizer(sc, kind, pv, i, bids, deviation_grid, bid_ceiling);
    rep.improvements(i) = alt.payoff - here;
    if (rep.improvements(i) > rep.worst_improvement) {
      rep.worst_improvement = rep.improvements(i);
      rep.worst_user = i;
      rep.worst_bid_row = alt.bids;
    }
  }
  rep.is_equilibrium = rep.worst_improvement <= eps;
  return rep;
}

double total_rate_increase(const Scenario& sc, const Eigen::MatrixXd& powers) {
  check_power_matrix(sc, powers, "powers");
  double total = 0.0;
  for (int i = 0; i < sc.num_users(); ++i) total += rate_increase(sc, i, powers.col(i));
  return total;
}

namespace {

// every way to hand out `levels - 1` budget steps across the users,
// allowing leftover budget
std::vector<std::vector<int>> budget_splits(int users, int levels) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(users, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == users) {
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      cur[pos] = c;
      rec(pos + 1, remaining - c);
    }
  };
  rec(0, levels - 1);
  return out;
}

}  // namespace

EfficiencyReport brute_force_efficiency(const Scenario& sc,
                                        const Eigen::MatrixXd& candidate_powers,
                                        int grid_resolution) {
  sc.validate();
  check_power_matrix(sc, candidate_powers, "candidate_powers");

  const int I = sc.num_users();
  const int K = sc.num_relays();
  int res = grid_resolution;
  if (res <= 0) {
    const int dims = I * K;
    if (dims <= 3)
      res = 101;
    else if (dims <= 6)
      res = 33;
    else
      throw std::invalid_argument(
          "grid_resolution: pass one explicitly for more than 6 power dimensions");
  }
  if (res < 2) throw std::invalid_argument("grid_resolution: must be >= 2");

  const std::vector<std::vector<int>> splits = budget_splits(I, res);
  const std::uint64_t per_relay = splits.size();
  std::uint64_t total = 1;
  for (int k = 0; k < K; ++k) {
    if (total > std::uint64_t{100000000} / per_relay + 1)
      throw std::invalid_argument(
          "grid_resolution: grid exceeds 1e8 points; reduce it or the instance size");
    total *= per_relay;
  }
  if (total > 100000000)
    throw std::invalid_argument(
        "grid_resolution: grid exceeds 1e8 points; reduce it or the instance size");

  // per relay: SNR increment and activity of every split, tabulated once
  std::vector<Eigen::MatrixXd> s_tab(K);
  std::vector<Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic>> act_tab(K);
  for (int k = 0; k < K; ++k) {
    s_tab[k].resize(static_cast<Eigen::Index>(per_relay), I);
    act_tab[k].resize(static_cast<Eigen::Index>(per_relay), I);
    for (std::uint64_t j = 0; j < per_relay; ++j)
      for (int i = 0; i < I; ++i) {
        const double p = sc.relays[k].total_power * splits[j][i] / (res - 1.0);
        s_tab[k](static_cast<Eigen::Index>(j), i) = relay_snr_increment(sc, i, k, p);
        act_tab[k](static_cast<Eigen::Index>(j), i) = p > sc.activity_threshold ? 1 : 0;
      }
  }

  Eigen::VectorXd gamma(I), base_rate(I);
  for (int i = 0; i < I; ++i) {
    gamma(i) = direct_snr(sc, i);
    base_rate(i) = sc.bandwidth * std::log2(1.0 + gamma(i));
  }
  const double w = sc.bandwidth;

  const auto value_at = [&](std::uint64_t flat) {
    double value = 0.0;
    for (int i = 0; i < I; ++i) {
      std::uint64_t rem = flat;
      double s = 0.0;
      int active = 0;
      for (int k = 0; k < K; ++k) {
        const auto j = static_cast<Eigen::Index>(rem % per_relay);
        rem /= per_relay;
        s += s_tab[k](j, i);
        active += act_tab[k](j, i);
      }
      value += std::max(w * std::log2(1.0 + gamma(i) + s) / (active + 1) - base_rate(i), 0.0);
    }
    return value;
  };

  struct Best {
    double value = -1.0;
    std::uint64_t flat = 0;
  };
  const auto scan = [&](std::uint64_t begin, std::uint64_t end) {
    Best b;
    for (std::uint64_t n = begin; n < end; ++n) {
      const double v = value_at(n);
      if (v > b.value) b = {v, n};
    }
    return b;
  };

  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, 16u);
  if (total < 65536) threads = 1;

  Best best;
  if (threads == 1) {
    best = scan(0, total);
  } else {
    std::vector<Best> partial(threads);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t begin = t * chunk;
      const std::uint64_t end = std::min(total, begin + chunk);
      pool.emplace_back([&, t, begin, end] { partial[t] = scan(begin, end); });
    }
    for (auto& th : pool) th.join();
    best = partial[0];
    // fixed merge order keeps the winner independent of thread timing
    for (unsigned t = 1; t < threads; ++t)
      if (partial[t].value > best.value ||
          (partial[t].value == best.value && partial[t].flat < best.flat))
        best = partial[t];
  }

  EfficiencyReport rep;
  rep.grid_resolution = res;
  rep.optimal_powers.resize(K, I);
  std::uint64_t rem = best.flat;
  for (int k = 0; k < K; ++k) {
    const auto j = rem % per_relay;
    rem /= per_relay;
    for (int i = 0; i < I; ++i)
      rep.optimal_powers(k, i) = sc.relays[k].total_power * splits[j][i] / (res - 1.0);
  }
  rep.optimal_value = best.value;
  rep.candidate_value = total_rate_increase(sc, candidate_powers);
  rep.gap = rep.optimal_value - rep.candidate_value;
  return rep;
}

double marginal_utility(const Scenario& sc, int user, int relay,
                        const Eigen::VectorXd& relay_powers) {
  check_user(sc, user);
  check_relay(sc, relay);
  if (relay_powers.size() != sc.num_relays())
    throw std::invalid_argument("relay_powers: length must equal number of relays");

  double s_sum = 0.0;
  int active = 0;
  for (int k = 0; k < sc.num_relays(); ++k) {
    if (relay_powers(k) < 0.0)
      throw std::invalid_argument("relay_powers: entries must be >= 0");
    s_sum += relay_snr_increment(sc, user, k, relay_powers(k));
    if (relay_powers(k) > sc.activity_threshold) ++active;
  }
  const double gamma = direct_snr(sc, user);
  return sc.bandwidth / ((active + 1) * std::numbers::ln2 * (1.0 + gamma + s_sum));
}

FairnessReport fairness_check(const Scenario& sc, const Eigen::MatrixXd& powers, double tol,
                              double tol_util) {
  sc.validate();
  check_power_matrix(sc, powers, "powers");
  if (!(tol > 0.0)) throw std::invalid_argument("tol: must be > 0");
  if (!(tol_util > 0.0)) throw std::invalid_argument("tol_util: must be > 0");

  const int I = sc.num_users();
  const int K = sc.num_relays();
  FairnessReport rep;
  bool any_active = false;
  bool all_pass = true;

  for (int k = 0; k < K; ++k) {
    RelayFairness rf;
    rf.relay = k;
    rf.utilization = powers.row(k).sum() / sc.relays[k].total_power;
    for (int i = 0; i < I; ++i)
      if (powers(k, i) > sc.activity_threshold) rf.active_users.push_back(i);

    if (rf.active_users.empty()) {
      rep.notice += "relay " + std::to_string(k) +
                    " has no active users and is excluded from the pass condition\n";
      rep.relays.push_back(std::move(rf));
      continue;
    }

    any_active = true;
    rf.has_active_users = true;
    const int n = static_cast<int>(rf.active_users.size());
    rf.marginals.resize(n);
    rf.residuals.resize(n);
    Eigen::VectorXd ratios(n);
    double marginal_sum = 0.0;
    double priority_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const int i = rf.active_users[j];
      rf.marginals(j) = marginal_utility(sc, i, k, powers.col(i));
      ratios(j) = rf.marginals(j) / sc.priority(i, k);
      marginal_sum += rf.marginals(j);
      priority_sum += sc.priority(i, k);
    }
    rf.implied_constant = marginal_sum / priority_sum;

    bool ok = rf.utilization > 1.0 - tol_util;
    for (int j = 0; j < n; ++j) {
      rf.residuals(j) = std::abs(ratios(j) - rf.implied_constant) / rf.implied_constant;
      if (!(rf.residuals(j) < tol)) ok = false;
    }
    rf.pass = ok;
    all_pass = all_pass && ok;
    rep.relays.push_back(std::move(rf));
  }

  rep.pass = any_active && all_pass;
  if (!any_active) rep.notice += "no relay has any active user\n";
  return rep;
}

}  // namespace relayauction
