#include <benchmark/benchmark.h>

#include <random>

#include "relayauction/best_response.hpp"
#include "relayauction/dynamics.hpp"
#include "relayauction/oracles.hpp"

namespace ra = relayauction;

namespace {

// small but non-symmetric instance so nothing collapses to a special case
ra::Scenario bench_scenario(int num_users, int num_relays) {
  ra::Scenario sc;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gain(0.2, 2.0);
  sc.users.resize(num_users);
  sc.relays.resize(num_relays);
  for (auto& u : sc.users) u.source_power = 1.0;
  for (auto& r : sc.relays) r.total_power = 10.0;
  sc.gains.g_sd.resize(num_users);
  sc.gains.g_sr.resize(num_users, num_relays);
  sc.gains.g_rd.resize(num_relays, num_users);
  for (int i = 0; i < num_users; ++i) {
    sc.gains.g_sd(i) = 0.3 * gain(rng);
    for (int k = 0; k < num_relays; ++k) {
      sc.gains.g_sr(i, k) = gain(rng);
      sc.gains.g_rd(k, i) = gain(rng);
    }
  }
  sc.bandwidth = 1.0;
  sc.noise_power = 0.1;
  sc.priority = ra::Scenario::uniform_priority(num_users, num_relays);
  sc.validate();
  return sc;
}

ra::BidProfile ones_profile(const ra::Scenario& sc) {
  return ra::BidProfile::Constant(sc.num_users(), sc.num_relays(), 1.0);
}

void BM_SnrBestResponse(benchmark::State& state) {
  const ra::Scenario sc = bench_scenario(3, static_cast<int>(state.range(0)));
  const ra::PriceVector pv = ra::PriceVector::uniform(sc.num_relays(), 0.2);
  const ra::BidProfile bids = ones_profile(sc);
  for (auto _ : state)
    benchmark::DoNotOptimize(ra::snr_best_response(sc, pv, 0, bids));
}
BENCHMARK(BM_SnrBestResponse)->Arg(2)->Arg(4);

void BM_PowerBestResponse(benchmark::State& state) {
  const ra::Scenario sc = bench_scenario(3, static_cast<int>(state.range(0)));
  const ra::PriceVector pv = ra::PriceVector::uniform(sc.num_relays(), 0.05);
  const ra::BidProfile bids = ones_profile(sc);
  for (auto _ : state)
    benchmark::DoNotOptimize(ra::power_best_response(sc, pv, 0, bids));
}
BENCHMARK(BM_PowerBestResponse)->Arg(2)->Arg(3);

void BM_SynchronousDynamics(benchmark::State& state) {
  const ra::Scenario sc = bench_scenario(3, 2);
  const ra::PriceVector pv = ra::PriceVector::uniform(2, 0.2);
  const ra::Schedule schedule = ra::make_schedule(ra::ScheduleKind::Synchronous, 3);
  const ra::Bounds bounds = ra::Bounds::uniform(3, 2);
  for (auto _ : state) {
    const ra::Trajectory traj =
        ra::run(sc, ra::AuctionKind::SnrAuction, pv, schedule, bounds, std::nullopt, 1e-9, 2000);
    benchmark::DoNotOptimize(traj.slots_used);
  }
}
BENCHMARK(BM_SynchronousDynamics);

void BM_OracleDeviationSearch(benchmark::State& state) {
  const ra::Scenario sc = bench_scenario(2, 2);
  const ra::PriceVector pv = ra::PriceVector::uniform(2, 0.2);
  const ra::BidProfile bids = ones_profile(sc);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ra::numeric_payoff_maximizer(sc, ra::AuctionKind::SnrAuction, pv, 0, bids));
}
BENCHMARK(BM_OracleDeviationSearch);

void BM_BruteForceEfficiency(benchmark::State& state) {
  const ra::Scenario sc = bench_scenario(2, 2);
  const Eigen::MatrixXd candidate = Eigen::MatrixXd::Zero(2, 2);
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(ra::brute_force_efficiency(sc, candidate, res));
}
BENCHMARK(BM_BruteForceEfficiency)->Arg(33)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
