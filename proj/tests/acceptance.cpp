// Acceptance gate for the release build. Each criterion prints one
// [PASS]/[FAIL] line; the process exit code is the number of failed
// criteria, so a zero exit means the whole gate is green.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relayauction/auction.hpp"
#include "relayauction/best_response.hpp"
#include "relayauction/channel.hpp"
#include "relayauction/dynamics.hpp"
#include "relayauction/experiment.hpp"
#include "relayauction/oracles.hpp"
#include "relayauction/scenario_io.hpp"

namespace ra = relayauction;

namespace {

int g_checks = 0;
int g_failures = 0;

#define ACC_CHECK(cond, ...)                                  \
  do {                                                        \
    ++g_checks;                                               \
    if (!(cond)) {                                            \
      ++g_failures;                                           \
      std::printf("    failed %s:%d: ", __FILE__, __LINE__);  \
      std::printf(__VA_ARGS__);                               \
      std::printf("\n");                                      \
    }                                                         \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string scenario_file() {
  return std::string(RELAYAUCTION_SCENARIO_DIR) + "/three_users_two_relays.json";
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Channel draws parameterized by direct SNR, ceiling increment and the power
// scale at which half the ceiling is reached (as a budget fraction).
struct ChannelRanges {
  double gamma_lo, gamma_hi;
  double sbar_lo, sbar_hi;
  double phalf_lo, phalf_hi;
};

constexpr ChannelRanges kWide{0.05, 2.0, 1.0, 8.0, 0.02, 0.5};
constexpr ChannelRanges kTame{0.05, 0.4, 3.5, 8.0, 0.02, 0.15};

ra::Scenario random_channel_scenario(std::mt19937_64& rng, int I, int K,
                                     const ChannelRanges& cr) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ra::Scenario sc;
  const double sigma2 = 1e-7;
  sc.bandwidth = 1e6;
  sc.noise_power = sigma2;
  sc.activity_threshold = 1e-9;
  for (int i = 0; i < I; ++i) sc.users.push_back({1.0});
  for (int k = 0; k < K; ++k) sc.relays.push_back({5.0 + 45.0 * unif(rng)});
  sc.gains.g_sd.resize(I);
  sc.gains.g_sr.resize(I, K);
  sc.gains.g_rd.resize(K, I);
  sc.priority.resize(I, K);
  for (int i = 0; i < I; ++i) {
    sc.gains.g_sd(i) = (cr.gamma_lo + (cr.gamma_hi - cr.gamma_lo) * unif(rng)) * sigma2;
    for (int k = 0; k < K; ++k) {
      sc.gains.g_sr(i, k) = (cr.sbar_lo + (cr.sbar_hi - cr.sbar_lo) * unif(rng)) * sigma2;
      const double p_half =
          sc.relays[k].total_power * (cr.phalf_lo + (cr.phalf_hi - cr.phalf_lo) * unif(rng));
      sc.gains.g_rd(k, i) = (sc.gains.g_sr(i, k) + sigma2) / p_half;
      sc.priority(i, k) = 0.5 + 1.5 * unif(rng);
    }
  }
  sc.validate();
  return sc;
}

// Below this price some user's single-relay target outruns what the relay can
// deliver at a bid of reasonable size, and the closed form stops being a
// certified optimum. Generators that compare against the numeric maximizer
// stay at or above the floor.
double reachable_price_floor(const ra::Scenario& sc, int k) {
  double floor_k = 0.0;
  for (int i = 0; i < static_cast<int>(sc.users.size()); ++i) {
    const double gamma = ra::direct_snr(sc, i);
    const double s08 = ra::relay_snr_increment(sc, i, k, 0.8 * sc.relays[k].total_power);
    floor_k = std::max(floor_k, sc.bandwidth / (2.0 * sc.priority(i, k) * std::numbers::ln2 *
                                                (1.0 + gamma + s08)));
  }
  return floor_k;
}

double power_for_increment(const ra::Scenario& sc, int i, int k, double s) {
  const double ps = sc.users[i].source_power;
  const double sbar = ps * sc.gains.g_sr(i, k) / sc.noise_power;
  const double p_half = (ps * sc.gains.g_sr(i, k) + sc.noise_power) / sc.gains.g_rd(k, i);
  return p_half * s / (sbar - s);
}

// Two-user clusters per relay: off-cluster relays are parked behind huge
// priorities, each cluster's price sits just under both members' opt-out
// price, and the relay budget is sized so joint demand hits `target`
// utilization. The interior fixed point is then available in closed form.
struct ClusterInstance {
  ra::Scenario sc;
  ra::PriceVector pv;
  ra::BidProfile bids;
  int num_relays = 0;
};

std::optional<ClusterInstance> make_cluster_instance(std::mt19937_64& rng, double target) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int K = 1 + static_cast<int>(unif(rng) * 3.0);
  const int I = 2 * K;

  ra::Scenario sc;
  const double sigma2 = 1e-7;
  sc.bandwidth = 1e6;
  sc.noise_power = sigma2;
  sc.activity_threshold = 1e-9;
  for (int i = 0; i < I; ++i) sc.users.push_back({1.0});
  for (int k = 0; k < K; ++k) sc.relays.push_back({1.0});

  sc.gains.g_sd.resize(I);
  sc.gains.g_sr.resize(I, K);
  sc.gains.g_rd.resize(K, I);
  sc.priority.resize(I, K);
  for (int i = 0; i < I; ++i) {
    sc.gains.g_sd(i) = (0.1 + 0.9 * unif(rng)) * sigma2;
    for (int k = 0; k < K; ++k) {
      sc.gains.g_sr(i, k) = sigma2;
      sc.gains.g_rd(k, i) = (0.5 + 2.0 * unif(rng)) * sigma2 * 10.0;
      sc.priority(i, k) = (i / 2 == k) ? 1.0 : 1e4;
    }
  }
  // Opt-out prices depend only on direct SNRs, so each cluster price can be
  // fixed first and the source-relay gains sized to keep the demanded
  // increment strictly attainable at that price.
  for (int k = 0; k < K; ++k) {
    const double price = std::min(ra::snr_upper_threshold(sc, 2 * k, k),
                                  ra::snr_upper_threshold(sc, 2 * k + 1, k)) / 1.05;
    for (int j = 0; j < 2; ++j) {
      const int i = 2 * k + j;
      const double sstar =
          sc.bandwidth / (2.0 * price * std::numbers::ln2) - 1.0 - ra::direct_snr(sc, i);
      for (int kk = 0; kk < K; ++kk) sc.gains.g_sr(i, kk) = (1.4 * sstar + 1.0) * sigma2;
    }
  }

  Eigen::VectorXd prices(K);
  for (int k = 0; k < K; ++k) {
    sc.relays[k].total_power = 1e3;
    prices(k) = std::min(ra::snr_upper_threshold(sc, 2 * k, k),
                         ra::snr_upper_threshold(sc, 2 * k + 1, k)) / 1.05;
    // The demanded power per user does not depend on the budget, so sizing
    // the budget from the provisional spend pins utilization exactly.
    double spend = 0.0;
    for (int i : {2 * k, 2 * k + 1}) {
      const auto c = ra::snr_coefficient(sc, i, k, prices(k));
      if (!(c.value > 0.0) || !std::isfinite(c.value)) return std::nullopt;
      spend += 1e3 * c.value / (1.0 + c.value);
    }
    sc.relays[k].total_power = spend / target;
  }
  sc.validate();

  ClusterInstance inst;
  inst.sc = sc;
  inst.num_relays = K;
  inst.pv.prices = prices;
  inst.pv.reserve_bids = Eigen::VectorXd::Constant(K, 1.0);

  inst.bids = ra::BidProfile::Constant(I, K, 1e-30);
  for (int k = 0; k < K; ++k) {
    double demand = 0.0;
    Eigen::Vector2d ratio;
    for (int j = 0; j < 2; ++j) {
      const auto c = ra::snr_coefficient(sc, 2 * k + j, k, prices(k));
      if (!(c.value > 0.0) || !std::isfinite(c.value)) return std::nullopt;
      ratio(j) = c.value / (1.0 + c.value);
      demand += ratio(j);
    }
    if (!(demand < 1.0)) return std::nullopt;
    for (int j = 0; j < 2; ++j)
      inst.bids(2 * k + j, k) = ratio(j) * inst.pv.reserve_bids(k) / (1.0 - demand);
  }
  return inst;
}

// Marginal rate per watt on relay k for one of two users drawing from both
// relays, with both relays counted active.
double marginal_per_watt_two_relays(const ra::Scenario& sc, int i, int k, double p0, double p1) {
  const double s = ra::relay_snr_increment(sc, i, 0, p0) + ra::relay_snr_increment(sc, i, 1, p1);
  const double ds = ra::relay_snr_increment_derivative(sc, i, k, k == 0 ? p0 : p1);
  return sc.bandwidth * ds /
         (3.0 * std::numbers::ln2 * (1.0 + ra::direct_snr(sc, i) + s));
}

// Symmetric-ish two-user two-relay instance whose social optimum splits all
// budgets across both users. Prices are read off the equalized marginals, so
// the resulting profile is a candidate equilibrium with every user on every
// relay.
struct SplitInstance {
  ra::Scenario sc;
  ra::PriceVector pv;
  ra::BidProfile bids;
};

SplitInstance make_split_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  ra::Scenario sc;
  sc.users = {{1.0}, {1.0}};
  sc.relays = {{10.0}, {10.0}};
  const double sigma2 = 1e-7;
  sc.bandwidth = 1e6;
  sc.noise_power = sigma2;
  sc.priority = ra::Scenario::uniform_priority(2, 2);
  sc.activity_threshold = 1e-9;

  sc.gains.g_sd.resize(2);
  sc.gains.g_sr.resize(2, 2);
  sc.gains.g_rd.resize(2, 2);
  for (int i = 0; i < 2; ++i) {
    sc.gains.g_sd(i) = 0.02 * sigma2 * jitter(rng);
    for (int k = 0; k < 2; ++k) {
      sc.gains.g_sr(i, k) = 1.0 * jitter(rng) * sigma2;
      const double p_half = 0.25 * jitter(rng);
      sc.gains.g_rd(k, i) = (sc.gains.g_sr(i, k) + sigma2) / p_half;
    }
  }
  sc.validate();

  const double u = 0.9995;
  const double B0 = u * sc.relays[0].total_power;
  const double B1 = u * sc.relays[1].total_power;

  // Split fractions (t, s): user 0 takes t*B0 and s*B1. Equalize the users'
  // per-relay marginals by nested bisection.
  auto solve_s = [&](double t) {
    double lo = 0.01, hi = 0.99;
    for (int it = 0; it < 80; ++it) {
      const double s = 0.5 * (lo + hi);
      const double m0 = marginal_per_watt_two_relays(sc, 0, 1, t * B0, s * B1);
      const double m1 = marginal_per_watt_two_relays(sc, 1, 1, (1 - t) * B0, (1 - s) * B1);
      (m0 > m1 ? lo : hi) = s;
    }
    return 0.5 * (lo + hi);
  };
  double tlo = 0.01, thi = 0.99;
  for (int it = 0; it < 80; ++it) {
    const double t = 0.5 * (tlo + thi);
    const double s = solve_s(t);
    const double m0 = marginal_per_watt_two_relays(sc, 0, 0, t * B0, s * B1);
    const double m1 = marginal_per_watt_two_relays(sc, 1, 0, (1 - t) * B0, (1 - s) * B1);
    (m0 > m1 ? tlo : thi) = t;
  }
  const double t = 0.5 * (tlo + thi);
  const double s = solve_s(t);

  Eigen::Matrix2d pstar;
  pstar << t * B0, s * B1, (1 - t) * B0, (1 - s) * B1;

  SplitInstance inst;
  inst.sc = sc;
  inst.pv.prices.resize(2);
  inst.pv.reserve_bids = Eigen::VectorXd::Constant(2, 1.0);
  inst.pv.prices(0) = marginal_per_watt_two_relays(sc, 0, 0, pstar(0, 0), pstar(0, 1));
  inst.pv.prices(1) = marginal_per_watt_two_relays(sc, 0, 1, pstar(0, 0), pstar(0, 1));

  inst.bids.resize(2, 2);
  for (int k = 0; k < 2; ++k) {
    const double P = sc.relays[k].total_power;
    const double used = pstar(0, k) + pstar(1, k);
    const double total = inst.pv.reserve_bids(k) * P / (P - used);
    for (int i = 0; i < 2; ++i) inst.bids(i, k) = pstar(i, k) * total / P;
  }
  return inst;
}

// ---------------------------------------------------------------------------
// criterion 1: reference scenario, single-relay structure and schedule-robust
// convergence inside the wall-clock budget
// ---------------------------------------------------------------------------
void criterion_reference_scenario() {
  const auto t0 = std::chrono::steady_clock::now();
  const ra::LoadedScenario loaded = ra::load_scenario(scenario_file());
  const ra::Scenario& sc = loaded.scenario;
  const int I = sc.num_users();
  ACC_CHECK(I == 3 && sc.num_relays() == 2, "expected 3 users and 2 relays");
  ACC_CHECK(loaded.prices.prices(0) < loaded.prices.prices(1),
            "relay 0 must undercut relay 1");

  const ra::Schedule sync = ra::make_schedule(ra::ScheduleKind::Synchronous, I);
  const ra::Trajectory ts = ra::run(sc, loaded.kind, loaded.prices, sync, loaded.bounds,
                                    std::nullopt, loaded.tol, loaded.max_slots);
  ACC_CHECK(ts.converged, "synchronous dynamics did not converge");

  const auto alloc = ra::evaluate_allocation(sc, loaded.kind, loaded.prices, ts.final_bids);
  for (int i = 0; i < I; ++i) {
    ACC_CHECK(alloc.powers(0, i) > sc.activity_threshold,
              "user %d inactive on the cheap relay (power %.3g)", i, alloc.powers(0, i));
    ACC_CHECK(alloc.powers(1, i) <= sc.activity_threshold,
              "user %d active on the expensive relay (power %.3g)", i, alloc.powers(1, i));
  }
  ACC_CHECK(ts.final_bids.col(1).maxCoeff() <= 1e-29,
            "bid mass left on the expensive relay (%.3g)", ts.final_bids.col(1).maxCoeff());

  const auto dev =
      ra::is_epsilon_ne(sc, loaded.kind, loaded.prices, ts.final_bids, 1e-6 * sc.bandwidth);
  ACC_CHECK(dev.is_equilibrium, "synchronous fixed point fails the equilibrium check (%.3g)",
            dev.worst_improvement);

  // Uniform activation probabilities, all with the same update-gap guarantee.
  for (double p : {0.1, 0.5, 1.0}) {
    const ra::Schedule bern = ra::make_bernoulli_schedule(I, p, 50, 777);
    const ra::Trajectory tb = ra::run(sc, loaded.kind, loaded.prices, bern, loaded.bounds,
                                      std::nullopt, loaded.tol, loaded.max_slots);
    const double diff = (tb.final_bids - ts.final_bids).cwiseAbs().maxCoeff();
    ACC_CHECK(tb.converged, "bernoulli(%.1f) did not converge", p);
    ACC_CHECK(diff <= 1e-6, "bernoulli(%.1f) fixed point off by %.3g", p, diff);
    ACC_CHECK(tb.slots_used > ts.slots_used,
              "bernoulli(%.1f) took %d slots, synchronous %d", p, tb.slots_used,
              ts.slots_used);
  }

  // Per-user probabilities straight from the scenario file.
  const ra::Trajectory tp = ra::run(sc, loaded.kind, loaded.prices, loaded.schedule,
                                    loaded.bounds, std::nullopt, loaded.tol, loaded.max_slots);
  const double pdiff = (tp.final_bids - ts.final_bids).cwiseAbs().maxCoeff();
  ACC_CHECK(tp.converged, "per-user bernoulli schedule did not converge");
  ACC_CHECK(pdiff <= 1e-6, "per-user bernoulli fixed point off by %.3g", pdiff);
  ACC_CHECK(tp.slots_used > ts.slots_used, "per-user bernoulli took %d slots, synchronous %d",
            tp.slots_used, ts.slots_used);

  const double elapsed = seconds_since(t0);
  ACC_CHECK(elapsed < 5.0, "criterion took %.2f s, budget is 5 s", elapsed);
}

// ---------------------------------------------------------------------------
// criterion 2: the closed-form response concentrates on one relay with the
// smallest priority-weighted price
// ---------------------------------------------------------------------------
void criterion_single_winner_structure() {
  std::mt19937_64 rng(7002);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int scenarios = 0;

  for (int t = 0; t < 500; ++t) {
    const int I = 1 + static_cast<int>(unif(rng) * 4.0);
    const int K = 1 + static_cast<int>(unif(rng) * 3.0);
    ra::Scenario sc = random_channel_scenario(rng, I, K, kWide);

    // Every tenth draw forces exact weighted-price ties across all relays.
    const bool tie = (t % 10 == 9);
    if (tie) sc.priority = ra::Scenario::uniform_priority(I, K);

    ra::PriceVector pv;
    pv.prices.resize(K);
    pv.reserve_bids = Eigen::VectorXd::Constant(K, 1.0);
    const double shared = std::pow(10.0, 4.8 + 1.5 * unif(rng));
    for (int k = 0; k < K; ++k)
      pv.prices(k) = tie ? shared : std::pow(10.0, 4.8 + 1.5 * unif(rng));

    ra::BidProfile bids(I, K);
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k) bids(i, k) = std::pow(10.0, -2.0 + 4.0 * unif(rng));

    for (int i = 0; i < I; ++i) {
      const Eigen::VectorXd br = ra::snr_best_response(sc, pv, i, bids);
      int nonzero = 0;
      int winner = -1;
      for (int k = 0; k < K; ++k)
        if (br(k) > 0.0) {
          ++nonzero;
          winner = k;
        }
      ACC_CHECK(nonzero <= 1, "t=%d user %d bid on %d relays", t, i, nonzero);
      if (nonzero == 1) {
        double wmin = pv.prices(0) * sc.priority(i, 0);
        for (int k = 1; k < K; ++k) wmin = std::min(wmin, pv.prices(k) * sc.priority(i, k));
        const double w = pv.prices(winner) * sc.priority(i, winner);
        ACC_CHECK(w <= wmin * (1.0 + 1e-12),
                  "t=%d user %d chose weighted price %.6g, minimum is %.6g", t, i, w, wmin);
      }
    }
    ++scenarios;
  }
  ACC_CHECK(scenarios >= 500, "only %d scenarios exercised", scenarios);
}

// ---------------------------------------------------------------------------
// criterion 3: closed-form and enumerative responses match the numeric
// payoff maximizer
// ---------------------------------------------------------------------------
void criterion_best_response_certification() {
  std::mt19937_64 rng(7003);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (const auto kind : {ra::AuctionKind::SnrAuction, ra::AuctionKind::PowerAuction}) {
    const char* label = kind == ra::AuctionKind::SnrAuction ? "snr" : "power";
    int instances = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const int I = 2 + static_cast<int>(unif(rng) * 2.0);
      const ra::Scenario sc = random_channel_scenario(rng, I, 2, kWide);
      ra::PriceVector pv;
      pv.prices.resize(2);
      pv.reserve_bids = Eigen::VectorXd::Constant(2, 1.0);
      for (int k = 0; k < 2; ++k) {
        if (kind == ra::AuctionKind::SnrAuction) {
          pv.prices(k) = reachable_price_floor(sc, k) * std::pow(10.0, 1.2 * unif(rng));
        } else {
          const double th = ra::relay_threshold_price(sc, k, kind);
          pv.prices(k) = (th > 0.0 ? th : 1e3) * (0.8 + 1.4 * unif(rng));
        }
      }
      ra::BidProfile bids(I, 2);
      for (int i = 0; i < I; ++i)
        for (int k = 0; k < 2; ++k) bids(i, k) = std::pow(10.0, -2.0 + 4.0 * unif(rng));

      for (int i = 0; i < I; ++i) {
        const Eigen::VectorXd br = kind == ra::AuctionKind::SnrAuction
                                       ? ra::snr_best_response(sc, pv, i, bids)
                                       : ra::power_best_response(sc, pv, i, bids);
        ra::BidProfile with_br = bids;
        with_br.row(i) = br.transpose();
        const double u_br = ra::payoff(sc, kind, pv, with_br, i);
        const auto oracle = ra::numeric_payoff_maximizer(sc, kind, pv, i, bids);
        const double diff = std::abs(u_br - oracle.payoff);
        worst = std::max(worst, diff);
        ACC_CHECK(diff <= 1e-6 * sc.bandwidth,
                  "%s t=%d user %d payoff gap %.4g (closed form %.10g, oracle %.10g)", label,
                  t, i, diff, u_br, oracle.payoff);
      }
      ++instances;
    }
    std::printf("    %s responses: %d instances, worst payoff gap %.3g\n", label, instances,
                worst);
    ACC_CHECK(instances >= 100, "%s: only %d instances exercised", label, instances);
  }
}

// ---------------------------------------------------------------------------
// criterion 4: threshold bisection against empirical sweeps, monotone demand
// and above-threshold convergence to certified equilibria
// ---------------------------------------------------------------------------
void criterion_threshold_consistency() {
  std::mt19937_64 rng(7004);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int instances = 0;

  for (int t = 0; t < 20; ++t) {
    const int I = 2 + static_cast<int>(unif(rng) * 3.0);
    const int K = 1 + static_cast<int>(unif(rng) * 2.0);
    const ra::AuctionKind kind =
        t % 2 ? ra::AuctionKind::PowerAuction : ra::AuctionKind::SnrAuction;
    const char* label = kind == ra::AuctionKind::SnrAuction ? "snr" : "power";
    const ra::Scenario sc = random_channel_scenario(rng, I, K, kTame);

    ra::LoadedScenario loaded;
    loaded.scenario = sc;
    loaded.kind = kind;
    loaded.prices.prices.resize(K);
    loaded.prices.reserve_bids = Eigen::VectorXd::Constant(K, 1.0);
    loaded.bounds = ra::Bounds::uniform(I, K, 1e-30, 1e6);
    loaded.schedule = ra::make_schedule(ra::ScheduleKind::Synchronous, I);
    loaded.tol = 1e-11;
    loaded.max_slots = 200000;
    for (int k = 0; k < K; ++k)
      loaded.prices.prices(k) = std::max(1.0, ra::relay_threshold_price(sc, k, kind)) * 1.1;

    const int relay = static_cast<int>(unif(rng) * K);
    const double th = ra::relay_threshold_price(sc, relay, kind);
    ACC_CHECK(th > 0.0, "%s t=%d: threshold price is zero", label, t);
    if (!(th > 0.0)) continue;

    std::vector<double> grid(41);
    for (int j = 0; j < 41; ++j) grid[j] = th * (0.5 + 1.0 * j / 40.0);
    const ra::SweepResult sweep = ra::sweep_prices(loaded, relay, grid);

    ACC_CHECK(sweep.threshold_bisection == th, "%s t=%d: sweep recomputed a different threshold",
              label, t);
    ACC_CHECK(sweep.has_bracket, "%s t=%d: demand never crossed 1 on the grid", label, t);
    if (sweep.has_bracket)
      ACC_CHECK(sweep.bracket_lower <= th * (1.0 + 1e-9) &&
                    th <= sweep.bracket_upper * (1.0 + 1e-9),
                "%s t=%d: threshold %.6g outside bracket [%.6g, %.6g]", label, t, th,
                sweep.bracket_lower, sweep.bracket_upper);

    bool monotone = true;
    for (std::size_t j = 1; j < sweep.points.size(); ++j)
      if (sweep.points[j].demand > sweep.points[j - 1].demand + 1e-12) monotone = false;
    ACC_CHECK(monotone, "%s t=%d: aggregate demand not nonincreasing", label, t);

    // All relays priced a margin above threshold: dynamics must converge to a
    // certified approximate equilibrium.
    const ra::Trajectory tr = ra::run(sc, kind, loaded.prices, loaded.schedule, loaded.bounds,
                                      std::nullopt, loaded.tol, loaded.max_slots);
    ACC_CHECK(tr.converged, "%s t=%d: no convergence in %d slots", label, t, tr.slots_used);
    if (tr.converged) {
      const auto dev =
          ra::is_epsilon_ne(sc, kind, loaded.prices, tr.final_bids, 1e-6 * sc.bandwidth);
      ACC_CHECK(dev.is_equilibrium, "%s t=%d: equilibrium check fails by %.4g", label, t,
                dev.worst_improvement);
    }
    ++instances;
  }
  ACC_CHECK(instances >= 20, "only %d instances exercised", instances);
}

// ---------------------------------------------------------------------------
// criterion 5: saturated equilibria equalize priority-weighted marginal rates
// ---------------------------------------------------------------------------
void criterion_fair_marginals() {
  std::mt19937_64 rng(7005);
  int made = 0;

  for (int trial = 0; trial < 20 && made < 12; ++trial) {
    const auto inst = make_cluster_instance(rng, 0.9995);
    if (!inst) continue;
    const ra::Scenario& sc = inst->sc;
    const int I = sc.num_users();
    const int K = inst->num_relays;

    const ra::Bounds bounds = ra::Bounds::uniform(I, K, 1e-30, 1e7);
    const ra::Schedule sync = ra::make_schedule(ra::ScheduleKind::Synchronous, I);
    const ra::Trajectory tr =
        ra::run(sc, ra::AuctionKind::SnrAuction, inst->pv, sync, bounds, inst->bids, 1e-9, 2000);
    ACC_CHECK(tr.converged, "trial %d: dynamics did not settle", trial);
    if (!tr.converged) continue;

    const auto alloc =
        ra::evaluate_allocation(sc, ra::AuctionKind::SnrAuction, inst->pv, tr.final_bids);
    double umin = 2.0;
    for (int k = 0; k < K; ++k)
      umin = std::min(umin, alloc.powers.row(k).sum() / sc.relays[k].total_power);
    ACC_CHECK(umin > 0.999, "trial %d: utilization %.6f below the saturation window", trial,
              umin);

    const auto dev = ra::is_epsilon_ne(sc, ra::AuctionKind::SnrAuction, inst->pv, tr.final_bids,
                                       1e-6 * sc.bandwidth);
    ACC_CHECK(dev.is_equilibrium, "trial %d: equilibrium check fails by %.4g", trial,
              dev.worst_improvement);

    const auto fair = ra::fairness_check(sc, alloc.powers);
    bool all_active = true;
    double worst_res = 0.0;
    for (const auto& r : fair.relays) {
      all_active = all_active && r.has_active_users;
      if (r.residuals.size()) worst_res = std::max(worst_res, r.residuals.cwiseAbs().maxCoeff());
    }
    ACC_CHECK(all_active, "trial %d: a relay ended up with no active users", trial);
    ACC_CHECK(fair.pass, "trial %d: fairness check failed", trial);
    ACC_CHECK(worst_res < 1e-3, "trial %d: worst marginal residual %.3g", trial, worst_res);

    if (tr.converged && umin > 0.999 && all_active && dev.is_equilibrium) ++made;
  }
  std::printf("    qualifying equilibria: %d\n", made);
  ACC_CHECK(made >= 10, "only %d qualifying instances", made);
}

// ---------------------------------------------------------------------------
// criterion 6: two-user two-relay equilibria reach the exhaustive-search
// optimum within the grid's resolution
// ---------------------------------------------------------------------------
void criterion_efficiency_gap() {
  std::mt19937_64 rng(7006);
  int made = 0;

  for (int trial = 0; trial < 15 && made < 5; ++trial) {
    const auto t0 = std::chrono::steady_clock::now();
    const SplitInstance inst = make_split_instance(rng);
    const ra::Scenario& sc = inst.sc;

    bool two_relay = true;
    for (int i = 0; i < 2; ++i) {
      const Eigen::VectorXd br = ra::power_best_response(sc, inst.pv, i, inst.bids);
      for (int k = 0; k < 2; ++k)
        if (br(k) <= 0.0) two_relay = false;
    }
    const auto alloc =
        ra::evaluate_allocation(sc, ra::AuctionKind::PowerAuction, inst.pv, inst.bids);
    const auto dev = ra::is_epsilon_ne(sc, ra::AuctionKind::PowerAuction, inst.pv, inst.bids,
                                       1e-6 * sc.bandwidth);
    double umin = 2.0;
    for (int k = 0; k < 2; ++k)
      umin = std::min(umin, alloc.powers.row(k).sum() / sc.relays[k].total_power);
    if (!(two_relay && dev.is_equilibrium && umin > 0.999)) continue;

    const auto eff = ra::brute_force_efficiency(sc, alloc.powers, 101);
    ACC_CHECK(eff.grid_resolution == 101, "trial %d: wrong grid resolution %d", trial,
              eff.grid_resolution);

    // The grid optimum and the equilibrium rate may differ by the value of
    // one grid step per power dimension plus the unspent budget headroom.
    double tolerance = 0.0;
    for (int k = 0; k < 2; ++k) {
      double mk = 0.0;
      for (int i = 0; i < 2; ++i)
        mk = std::max(mk, ra::marginal_utility(sc, i, k, alloc.powers.col(i)) *
                              ra::relay_snr_increment_derivative(sc, i, k, alloc.powers(k, i)));
      const double uk = alloc.powers.row(k).sum() / sc.relays[k].total_power;
      const double step = sc.relays[k].total_power / 100.0;
      tolerance += mk * ((1.0 - uk) * sc.relays[k].total_power + 2.0 * step);
    }
    tolerance *= 1.25;
    ACC_CHECK(std::abs(eff.gap) <= tolerance,
              "trial %d: rate gap %.6g exceeds resolution tolerance %.6g", trial, eff.gap,
              tolerance);

    const double elapsed = seconds_since(t0);
    ACC_CHECK(elapsed < 60.0, "trial %d took %.1f s, budget is 60 s", trial, elapsed);
    ++made;
  }
  std::printf("    qualifying equilibria: %d\n", made);
  ACC_CHECK(made >= 5, "only %d qualifying instances", made);
}

// ---------------------------------------------------------------------------
// criterion 7: derivative and root identities at scale
// ---------------------------------------------------------------------------
void criterion_numeric_identities() {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double worst_fd = 0.0;
  int points = 0;
  for (int attempt = 0; attempt < 20000 && points < 1000; ++attempt) {
    const int I = 1 + static_cast<int>(unif(rng) * 3.0);
    const int K = 1 + static_cast<int>(unif(rng) * 3.0);
    const ra::Scenario sc = random_channel_scenario(rng, I, K, kWide);
    const int i = static_cast<int>(unif(rng) * I);
    const int k = static_cast<int>(unif(rng) * K);

    Eigen::VectorXd col(K);
    for (int j = 0; j < K; ++j)
      col(j) = sc.relays[j].total_power * (0.2 + 0.5 * unif(rng));

    double total = 0.0;
    for (int j = 0; j < K; ++j) total += ra::relay_snr_increment(sc, i, j, col(j));
    const double h = 1e-5 * (1.0 + ra::direct_snr(sc, i) + total);
    const double sk = ra::relay_snr_increment(sc, i, k, col(k));

    Eigen::VectorXd up = col, down = col;
    up(k) = power_for_increment(sc, i, k, sk + h);
    down(k) = power_for_increment(sc, i, k, sk - h);

    // The derivative identity holds where the relayed rate beats direct
    // transmission; draws in the clamped-to-zero region are redrawn. The
    // increase grows with the SNR sum, so checking the lower endpoint
    // covers the whole difference interval.
    if (!(ra::rate_increase(sc, i, down) > 0.0)) continue;

    const double mu = ra::marginal_utility(sc, i, k, col);
    const double fd =
        (ra::rate_increase(sc, i, up) - ra::rate_increase(sc, i, down)) / (2.0 * h);

    const double rel = std::abs(fd - mu) / std::abs(mu);
    worst_fd = std::max(worst_fd, rel);
    ACC_CHECK(rel < 1e-6, "point %d: finite difference off by %.3g relative", points, rel);
    ++points;
  }
  std::printf("    worst finite-difference deviation: %.3g\n", worst_fd);
  ACC_CHECK(points >= 1000, "only %d usable derivative points", points);

  // Opt-out price: plugging the root back into its defining identity must
  // leave a dimensionless residual at solver precision.
  double worst_root = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double gamma = std::pow(10.0, -2.0 + 3.0 * unif(rng));
    const double q = std::pow(10.0, -0.6 + 1.2 * unif(rng));
    ra::Scenario sc;
    sc.users = {{1.0}};
    sc.relays = {{10.0}};
    const double sigma2 = 1e-7;
    sc.bandwidth = std::pow(10.0, 5.0 + 2.0 * unif(rng));
    sc.noise_power = sigma2;
    sc.gains.g_sd = Eigen::VectorXd::Constant(1, gamma * sigma2);
    sc.gains.g_sr = Eigen::MatrixXd::Constant(1, 1, 3.0 * sigma2);
    sc.gains.g_rd = Eigen::MatrixXd::Constant(1, 1, 20.0 * sigma2);
    sc.priority = Eigen::MatrixXd::Constant(1, 1, q);
    sc.activity_threshold = 1e-9;
    sc.validate();

    const double W = sc.bandwidth;
    const double pihat = ra::snr_upper_threshold(sc, 0, 0);
    const double lhs = pihat * q * (1.0 + gamma);
    const double rhs =
        (W / 2.0) * (std::log2((2.0 * pihat * q * std::numbers::ln2 / W) * (1.0 + gamma) *
                               (1.0 + gamma)) +
                     1.0 / std::numbers::ln2);
    const double rel = std::abs(lhs - rhs) / lhs;
    worst_root = std::max(worst_root, rel);
    ACC_CHECK(rel < 1e-8, "n=%d: opt-out price residual %.3g (gamma %.3g, q %.3g)", n, rel,
              gamma, q);
  }
  std::printf("    worst opt-out residual: %.3g\n", worst_root);
}

// ---------------------------------------------------------------------------
// criterion 8: reserve bids rescale equilibrium bids but not powers
// ---------------------------------------------------------------------------
void criterion_reserve_invariance() {
  std::mt19937_64 rng(7008);
  int done = 0;

  const auto compare_runs = [&](const ra::Scenario& sc, ra::AuctionKind kind,
                                const ra::PriceVector& base, const ra::Bounds& bounds,
                                double tol, int max_slots, const char* label, int idx) {
    Eigen::MatrixXd powers[2];
    bool ok = true;
    const double betas[2] = {1.0, 5.0};
    for (int v = 0; v < 2; ++v) {
      ra::PriceVector pv = base;
      pv.reserve_bids = Eigen::VectorXd::Constant(sc.num_relays(), betas[v]);
      const ra::Schedule sync = ra::make_schedule(ra::ScheduleKind::Synchronous, sc.num_users());
      const ra::Trajectory tr =
          ra::run(sc, kind, pv, sync, bounds, std::nullopt, tol, max_slots);
      ACC_CHECK(tr.converged, "%s %d: beta=%g run did not converge", label, idx, betas[v]);
      ok = ok && tr.converged;
      powers[v] = ra::allocate(sc, pv, tr.final_bids);
    }
    if (!ok) return false;
    for (int k = 0; k < sc.num_relays(); ++k)
      for (int i = 0; i < sc.num_users(); ++i) {
        const double a = powers[0](k, i);
        const double b = powers[1](k, i);
        const double den = std::max(a, b);
        if (den <= 1e-9 * sc.relays[k].total_power) continue;
        ACC_CHECK(std::abs(a - b) / den < 1e-6,
                  "%s %d: power (%d,%d) moved by %.3g relative", label, idx, k, i,
                  std::abs(a - b) / den);
      }
    return true;
  };

  for (int trial = 0; trial < 12 && done < 5; ++trial) {
    const auto inst = make_cluster_instance(rng, 0.9);
    if (!inst) continue;
    // The convergence test scales the tolerance by the bid ceiling, so the
    // ceiling stays modest and the tolerance tight enough that leftover bid
    // drift cannot show up in the sixth decimal of the powers.
    const ra::Bounds bounds =
        ra::Bounds::uniform(inst->sc.num_users(), inst->num_relays, 1e-30, 1e4);
    if (compare_runs(inst->sc, ra::AuctionKind::SnrAuction, inst->pv, bounds, 1e-12, 100000,
                     "cluster", trial))
      ++done;
  }
  ACC_CHECK(done >= 5, "only %d cluster instances compared", done);

  // Power-auction instances priced a margin above both relay thresholds.
  std::vector<ra::Position> tx = {{100, -25}, {-100, 25}};
  std::vector<ra::Position> rx = {{-100, 25}, {100, 25}};
  std::vector<ra::Position> relays = {{0, -2}, {0, 0}};
  ra::Scenario sc;
  sc.users = {{1.0}, {1.0}};
  sc.relays = {{20.0}, {20.0}};
  sc.gains = ra::gains_from_positions(tx, rx, relays, 3.0);
  sc.bandwidth = 1e6;
  sc.noise_power = 2.28e-7;
  sc.priority = ra::Scenario::uniform_priority(2, 2);
  sc.activity_threshold = 1e-9;
  sc.validate();

  const double th0 = ra::relay_threshold_price(sc, 0, ra::AuctionKind::PowerAuction);
  const double th1 = ra::relay_threshold_price(sc, 1, ra::AuctionKind::PowerAuction);
  ACC_CHECK(th0 > 0.0 && th1 > 0.0, "power-auction thresholds must be positive");

  int power_done = 0;
  const double mults[5] = {1.04, 1.07, 1.10, 1.14, 1.18};
  for (int m = 0; m < 5; ++m) {
    ra::PriceVector pv;
    pv.prices.resize(2);
    pv.prices << th0 * mults[m], th1 * mults[m];
    pv.reserve_bids = Eigen::VectorXd::Constant(2, 1.0);
    const ra::Bounds bounds = ra::Bounds::uniform(2, 2, 1e-30, 1e6);
    if (compare_runs(sc, ra::AuctionKind::PowerAuction, pv, bounds, 1e-12, 200000, "power", m))
      ++power_done;
  }
  ACC_CHECK(power_done >= 5, "only %d power-auction instances compared", power_done);
  ACC_CHECK(done + power_done >= 10, "only %d instances total", done + power_done);
}

// ---------------------------------------------------------------------------
// criterion 9: fixed seeds reproduce trajectories byte for byte
// ---------------------------------------------------------------------------
void criterion_determinism() {
  ra::RunSettings settings;
  settings.loaded = ra::load_scenario(scenario_file());

  const auto base = std::filesystem::temp_directory_path() / "relayauction_acceptance";
  std::filesystem::remove_all(base);
  std::filesystem::path dirs[2] = {base / "a", base / "b"};

  std::string csv[2], report[2];
  for (int v = 0; v < 2; ++v) {
    ra::RunSettings s = settings;
    s.out_dir = dirs[v].string();
    const ra::RunReport rep = ra::run_experiment(s);
    ACC_CHECK(rep.converged, "run %d did not converge", v);
    csv[v] = slurp(rep.csv_path);
    report[v] = slurp(rep.report_path);
  }
  ACC_CHECK(!csv[0].empty(), "first trajectory file is empty");
  ACC_CHECK(csv[0] == csv[1], "trajectory files differ between identical runs");
  ACC_CHECK(report[0] == report[1], "report files differ between identical runs");
  std::filesystem::remove_all(base);
}

struct Criterion {
  const char* label;
  void (*body)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"reference scenario: single-relay structure, schedule-robust convergence",
       criterion_reference_scenario},
      {"single-winner structure of the closed-form response (500 scenarios)",
       criterion_single_winner_structure},
      {"closed-form and enumerative responses match the numeric maximizer",
       criterion_best_response_certification},
      {"threshold bisection vs price sweeps, monotone demand, certified equilibria",
       criterion_threshold_consistency},
      {"saturated equilibria equalize priority-weighted marginal rates",
       criterion_fair_marginals},
      {"two-user two-relay equilibria reach the grid optimum within resolution",
       criterion_efficiency_gap},
      {"derivative and root identities on 1000-point batches", criterion_numeric_identities},
      {"reserve bids leave converged power allocations unchanged",
       criterion_reserve_invariance},
      {"identical seeds reproduce byte-identical trajectories", criterion_determinism},
  };

  int failed_criteria = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    g_checks = 0;
    g_failures = 0;
    const auto t0 = std::chrono::steady_clock::now();
    c.body();
    const double elapsed = seconds_since(t0);
    const bool pass = g_failures == 0;
    if (!pass) ++failed_criteria;
    std::printf("[%s] %d. %s (%d checks, %.1f s)\n", pass ? "PASS" : "FAIL", index, c.label,
                g_checks, elapsed);
    std::fflush(stdout);
  }

  if (failed_criteria == 0)
    std::printf("all %d criteria passed\n", index);
  else
    std::printf("%d of %d criteria FAILED\n", failed_criteria, index);
  return failed_criteria;
}
