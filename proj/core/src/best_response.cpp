#include "relayauction/best_response.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "relayauction/numeric.hpp"

namespace relayauction {

namespace {

void check_user(const Scenario& sc, int user) {
  if (user < 0 || user >= sc.num_users()) throw std::out_of_range("user: index out of range");
}

void check_relay(const Scenario& sc, int relay) {
  if (relay < 0 || relay >= sc.num_relays()) throw std::out_of_range("relay: index out of range");
}

void check_price(double price) {
  if (!std::isfinite(price) || !(price > 0.0))
    throw std::invalid_argument("price: must be finite and > 0");
}

bool dead_path(const Scenario& sc, int user, int relay) {
  return !(sc.gains.g_sr(user, relay) > 0.0) || !(sc.gains.g_rd(relay, user) > 0.0);
}

}  // namespace

double snr_lower_threshold(const Scenario& sc, int user, int relay) {
  check_user(sc, user);
  check_relay(sc, relay);
  if (dead_path(sc, user, relay)) return 0.0;
  const double q = sc.priority(user, relay);
  const double gamma = direct_snr(sc, user);
  const double s_full = relay_snr_increment(sc, user, relay, sc.relays[relay].total_power);
  return sc.bandwidth / (2.0 * q * std::numbers::ln2) / (1.0 + gamma + s_full);
}

double snr_upper_threshold(const Scenario& sc, int user, int relay) {
  check_user(sc, user);
  check_relay(sc, relay);
  if (dead_path(sc, user, relay)) return 0.0;
  const double q = sc.priority(user, relay);
  const double gamma = direct_snr(sc, user);

  // In the scaled variable x = 2*price*q*ln2/W the indifference equation
  // becomes h(x) = x(1+gamma) - ln x - 2 ln(1+gamma) - 1 = 0. h is convex
  // with its minimum at x = 1/(1+gamma), where h = -ln(1+gamma) <= 0, so
  // the smallest root lies in (0, 1/(1+gamma)].
  const auto h = [gamma](double x) {
    return x * (1.0 + gamma) - std::log(x) - 2.0 * std::log1p(gamma) - 1.0;
  };
  const double x_min = 1.0 / (1.0 + gamma);
  const double to_price = sc.bandwidth / (2.0 * q * std::numbers::ln2);
  if (h(x_min) >= 0.0) return x_min * to_price;  // gamma = 0 up to rounding: double root

  double lo = x_min;
  for (int it = 0; it < 1100 && !(h(lo) > 0.0); ++it) lo *= 0.5;
  if (!(h(lo) > 0.0)) throw std::runtime_error("snr_upper_threshold: bracketing failed");
  return bisect_root(h, lo, x_min, 1e-13) * to_price;
}

SnrCoefficient snr_coefficient(const Scenario& sc, int user, int relay, double price) {
  check_user(sc, user);
  check_relay(sc, relay);
  check_price(price);

  SnrCoefficient out;
  if (dead_path(sc, user, relay)) return out;

  out.lower_threshold = snr_lower_threshold(sc, user, relay);
  out.upper_threshold = snr_upper_threshold(sc, user, relay);
  out.degenerate = out.upper_threshold <= out.lower_threshold;

  const double q = sc.priority(user, relay);
  const double gamma = direct_snr(sc, user);
  const double w = sc.bandwidth;
  const double s = w / (2.0 * price * q * std::numbers::ln2) - 1.0 - gamma;
  if (!(s > 0.0)) return out;

  // payoff of entering this relay alone at increment x, including the extra
  // time slot the relayed transmission costs
  const auto net = [&](double x) {
    return w * (std::log2(1.0 + gamma + x) / 2.0 - std::log2(1.0 + gamma)) - price * q * x;
  };
  const double inf = std::numeric_limits<double>::infinity();
  const double s_full = relay_snr_increment(sc, user, relay, sc.relays[relay].total_power);
  if (s >= s_full) {
    // the stationary demand is beyond what the relay can deliver even alone;
    // the user grabs everything while the full increment still pays
    out.value = net(s_full) > 0.0 ? inf : 0.0;
    return out;
  }
  if (!(net(s) > 0.0)) return out;

  const double a = sc.users[user].source_power * sc.gains.g_sr(user, relay);
  const double sigma2 = sc.noise_power;
  const double pr = sc.relays[relay].total_power;
  const double grd = sc.gains.g_rd(relay, user);
  const double denom = pr * grd * a / s - (a + pr * grd + sigma2) * sigma2;
  // denom <= 0 only from rounding at the full-demand boundary, where the
  // exact coefficient diverges anyway
  out.value = denom > 0.0 ? (a + sigma2) * sigma2 / denom : inf;
  return out;
}

Eigen::VectorXd snr_best_response(const Scenario& sc, const PriceVector& pv, int user,
                                  const BidProfile& bids, const BestResponseOptions& opts) {
  check_user(sc, user);
  pv.validate(sc.num_relays());
  validate_bids(sc, bids);
  const int K = sc.num_relays();

  int k_star = 0;
  for (int k = 1; k < K; ++k)
    if (pv.prices(k) * sc.priority(user, k) < pv.prices(k_star) * sc.priority(user, k_star))
      k_star = k;

  const SnrCoefficient coef = snr_coefficient(sc, user, k_star, pv.prices(k_star));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(K);
  if (coef.value == 0.0) return out;
  const double others = bids.col(k_star).sum() - bids(user, k_star) + pv.reserve_bids(k_star);
  if (std::isinf(coef.value)) {
    // a ceiling bid only reaches part of the relay when opponents bid large;
    // enter only if the reachable increment still pays for the extra slot
    const double pr = sc.relays[k_star].total_power;
    const double reach = relay_snr_increment(sc, user, k_star,
                                             pr * opts.bid_ceiling / (opts.bid_ceiling + others));
    const double gamma = direct_snr(sc, user);
    const double gain =
        sc.bandwidth * (std::log2(1.0 + gamma + reach) / 2.0 - std::log2(1.0 + gamma));
    if (!(gain - pv.prices(k_star) * sc.priority(user, k_star) * reach > 0.0)) return out;
    out(k_star) = opts.bid_ceiling;
    return out;
  }
  out(k_star) = coef.value * others;
  return out;
}

namespace {

struct InnerResult {
  Eigen::VectorXd powers;
  double payoff = 0.0;
  double rate_gain = 0.0;
};

// Maximizes the fixed-subset payoff over the reachable power box by
// coordinate ascent. The objective is jointly concave in the subset powers,
// so cyclic exact line maximization converges to the case optimum.
InnerResult maximize_over_subset(const Scenario& sc, const PriceVector& pv, int user,
                                 const std::vector<int>& subset, const Eigen::VectorXd& p_max,
                                 const BestResponseOptions& opts) {
  const int K = sc.num_relays();
  InnerResult r;
  r.powers = Eigen::VectorXd::Zero(K);
  if (subset.empty()) return r;

  const double w = sc.bandwidth;
  const double gamma = direct_snr(sc, user);
  const double base_rate = w * std::log2(1.0 + gamma);
  const int uses = static_cast<int>(subset.size()) + 1;

  double span = 0.0;
  for (int k : subset) span = std::max(span, p_max(k));
  const double x_tol = opts.inner_tol * span;

  Eigen::VectorXd p = Eigen::VectorXd::Zero(K);
  for (int k : subset) p(k) = 0.5 * p_max(k);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double moved = 0.0;
    for (int k : subset) {
      double s_rest = 0.0;
      for (int j : subset)
        if (j != k) s_rest += relay_snr_increment(sc, user, j, p(j));
      const double price = pv.prices(k);
      const auto line = [&](double x) {
        const double s = s_rest + relay_snr_increment(sc, user, k, x);
        return w * std::log2(1.0 + gamma + s) / uses - price * x;
      };
      const ScalarMax best = golden_section_max(line, 0.0, p_max(k), x_tol);
      moved = std::max(moved, std::abs(best.x - p(k)));
      p(k) = best.x;
    }
    if (moved <= x_tol) break;
  }

  double s_sum = 0.0;
  double cost = 0.0;
  for (int k : subset) {
    s_sum += relay_snr_increment(sc, user, k, p(k));
    cost += pv.prices(k) * p(k);
  }
  r.powers = p;
  r.rate_gain = w * std::log2(1.0 + gamma + s_sum) / uses - base_rate;
  r.payoff = r.rate_gain - cost;
  return r;
}

Eigen::VectorXd opponent_totals(const Scenario& sc, const PriceVector& pv, int user,
                                const BidProfile& bids) {
  const int K = sc.num_relays();
  Eigen::VectorXd totals(K);
  for (int k = 0; k < K; ++k)
    totals(k) = bids.col(k).sum() - bids(user, k) + pv.reserve_bids(k);
  return totals;
}

}  // namespace

std::vector<RelayChoiceCase> power_response_cases(const Scenario& sc, const PriceVector& pv,
                                                  int user, const BidProfile& bids,
                                                  const BestResponseOptions& opts) {
  check_user(sc, user);
  pv.validate(sc.num_relays());
  validate_bids(sc, bids);
  const int K = sc.num_relays();
  if (K > opts.max_relays_enumerated)
    throw std::invalid_argument("relays: count exceeds BestResponseOptions.max_relays_enumerated");

  const Eigen::VectorXd opponents = opponent_totals(sc, pv, user, bids);
  Eigen::VectorXd p_max(K);
  for (int k = 0; k < K; ++k)
    p_max(k) =
        sc.relays[k].total_power * opts.bid_ceiling / (opts.bid_ceiling + opponents(k));

  std::vector<unsigned> masks(std::size_t{1} << K);
  std::iota(masks.begin(), masks.end(), 0u);
  std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    const int ca = std::popcount(a);
    const int cb = std::popcount(b);
    return ca != cb ? ca < cb : a < b;
  });

  std::vector<RelayChoiceCase> cases;
  cases.reserve(masks.size());
  for (unsigned mask : masks) {
    RelayChoiceCase c;
    for (int k = 0; k < K; ++k)
      if (mask & (1u << k)) c.subset.push_back(k);
    const InnerResult inner = maximize_over_subset(sc, pv, user, c.subset, p_max, opts);
    c.powers = inner.powers;
    c.rate_gain = inner.rate_gain;
    c.payoff = inner.payoff;
    c.coefficients = Eigen::VectorXd::Zero(K);
    for (int k : c.subset) {
      const double pr = sc.relays[k].total_power;
      c.coefficients(k) = inner.powers(k) / (pr - inner.powers(k));
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

Eigen::VectorXd power_best_response(const Scenario& sc, const PriceVector& pv, int user,
                                    const BidProfile& bids, const BestResponseOptions& opts) {
  const auto cases = power_response_cases(sc, pv, user, bids, opts);
  const RelayChoiceCase* winner = &cases.front();
  for (const auto& c : cases)
    if (c.payoff > winner->payoff) winner = &c;

  const Eigen::VectorXd opponents = opponent_totals(sc, pv, user, bids);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sc.num_relays());
  for (int k : winner->subset)
    out(k) = std::min(winner->coefficients(k) * opponents(k), opts.bid_ceiling);
  return out;
}

double aggregate_demand(const Scenario& sc, int relay, AuctionKind kind, double price) {
  check_relay(sc, relay);
  check_price(price);
  const int I = sc.num_users();
  double demand = 0.0;
  for (int i = 0; i < I; ++i) {
    if (dead_path(sc, i, relay)) continue;
    if (kind == AuctionKind::SnrAuction) {
      const SnrCoefficient c = snr_coefficient(sc, i, relay, price);
      demand += std::isinf(c.value) ? 1.0 : c.value / (c.value + 1.0);
    } else {
      const double pr = sc.relays[relay].total_power;
      const double w = sc.bandwidth;
      const double gamma = direct_snr(sc, i);
      const double base_rate = w * std::log2(1.0 + gamma);
      const auto phi = [&](double p) {
        return w * std::log2(1.0 + gamma + relay_snr_increment(sc, i, relay, p)) / 2.0 -
               base_rate - price * p;
      };
      const ScalarMax best = golden_section_max(phi, 0.0, pr, 1e-11 * pr);
      // a user whose best single-relay payoff is not positive sits out
      if (best.value > 0.0) demand += best.x / pr;
    }
  }
  return demand;
}

double relay_threshold_price(const Scenario& sc, int relay, AuctionKind kind) {
  check_relay(sc, relay);
  const int I = sc.num_users();

  double hi = 0.0;
  for (int i = 0; i < I; ++i) {
    if (dead_path(sc, i, relay)) continue;
    if (kind == AuctionKind::SnrAuction) {
      hi = std::max(hi, snr_upper_threshold(sc, i, relay));
    } else {
      // above the zero-power marginal rate the user cannot profit at all
      const double a = sc.users[i].source_power * sc.gains.g_sr(i, relay);
      const double slope0 = a * sc.gains.g_rd(relay, i) / (sc.noise_power * (a + sc.noise_power));
      const double gamma = direct_snr(sc, i);
      hi = std::max(hi, sc.bandwidth * slope0 / (2.0 * std::numbers::ln2 * (1.0 + gamma)));
    }
  }
  if (hi == 0.0) return 0.0;  // no user can ever profit from this relay

  const auto saturated = [&](double price) {
    return aggregate_demand(sc, relay, kind, price) >= 1.0;
  };
  for (int it = 0; it < 200 && saturated(hi); ++it) hi *= 2.0;
  if (saturated(hi)) throw std::runtime_error("relay_threshold_price: demand never falls below 1");

  double lo = hi;
  bool found = false;
  for (int it = 0; it < 1200; ++it) {
    lo *= 0.5;
    if (!(lo > 0.0)) break;
    if (saturated(lo)) {
      found = true;
      break;
    }
  }
  if (!found) return 0.0;
  return bisect_predicate(saturated, lo, hi, 1e-8);
}

}  // namespace relayauction
