#include "relayauction/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "relayauction/best_response.hpp"

namespace relayauction {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

int RunReport::exit_code() const {
  if (!converged) return 2;
  if (equilibrium_checked && !equilibrium.is_equilibrium) return 4;
  return 0;
}

std::string RunReport::to_json() const {
  json doc;
  doc["converged"] = converged;
  doc["slots_used"] = slots_used;
  doc["final"] = {{"bids", matrix_to_json(final_bids)},
                  {"powers", matrix_to_json(final_allocation.powers)},
                  {"rates", vector_to_json(final_allocation.rates)},
                  {"payments", vector_to_json(final_allocation.payments)},
                  {"payoffs", vector_to_json(final_allocation.payoffs)}};

  if (equilibrium_checked) {
    doc["equilibrium"] = {{"pass", equilibrium.is_equilibrium},
                          {"eps", equilibrium.eps},
                          {"improvements", vector_to_json(equilibrium.improvements)},
                          {"worst_user", equilibrium.worst_user},
                          {"worst_improvement", equilibrium.worst_improvement}};
  }
  if (fairness_checked) {
    json relays = json::array();
    for (const auto& rf : fairness.relays) {
      json r = {{"relay", rf.relay},
                {"active_users", rf.active_users},
                {"utilization", rf.utilization},
                {"has_active_users", rf.has_active_users},
                {"pass", rf.pass}};
      if (rf.has_active_users) {
        r["marginals"] = vector_to_json(rf.marginals);
        r["implied_constant"] = rf.implied_constant;
        r["residuals"] = vector_to_json(rf.residuals);
      }
      relays.push_back(std::move(r));
    }
    doc["fairness"] = {{"pass", fairness.pass}, {"notice", fairness.notice},
                       {"relays", std::move(relays)}};
  }
  if (efficiency_checked) {
    doc["efficiency"] = {{"grid_resolution", efficiency.grid_resolution},
                         {"optimal_value", efficiency.optimal_value},
                         {"candidate_value", efficiency.candidate_value},
                         {"gap", efficiency.gap},
                         {"optimal_powers", matrix_to_json(efficiency.optimal_powers)}};
  }
  return doc.dump(2) + "\n";
}

RunReport run_experiment(const RunSettings& settings) {
  LoadedScenario loaded = settings.loaded;
  if (settings.seed_override) loaded.schedule.rng_seed = *settings.seed_override;
  if (settings.tol_override) loaded.tol = *settings.tol_override;
  if (settings.max_slots_override) loaded.max_slots = *settings.max_slots_override;

  const Scenario& sc = loaded.scenario;
  const Trajectory traj = run(sc, loaded.kind, loaded.prices, loaded.schedule, loaded.bounds,
                              std::nullopt, loaded.tol, loaded.max_slots);

  RunReport rep;
  rep.converged = traj.converged;
  rep.slots_used = traj.slots_used;
  rep.final_bids = traj.final_bids;
  rep.final_allocation = evaluate_allocation(sc, loaded.kind, loaded.prices, traj.final_bids);

  if (settings.checks.equilibrium) {
    rep.equilibrium_checked = true;
    rep.equilibrium = is_epsilon_ne(sc, loaded.kind, loaded.prices, traj.final_bids,
                                    settings.ne_eps_scale * sc.bandwidth);
  }
  if (settings.checks.fairness) {
    rep.fairness_checked = true;
    rep.fairness = fairness_check(sc, rep.final_allocation.powers, settings.fairness_tol);
  }
  if (settings.checks.efficiency) {
    rep.efficiency_checked = true;
    rep.efficiency =
        brute_force_efficiency(sc, rep.final_allocation.powers, settings.efficiency_grid);
  }

  if (!settings.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(settings.out_dir, ec);
    if (ec)
      throw std::runtime_error(settings.out_dir + ": cannot create output directory (" +
                               ec.message() + ")");
    rep.csv_path = settings.out_dir + "/trajectory.csv";
    write_trajectory_csv(rep.csv_path, sc, loaded.kind, loaded.prices, traj);
    rep.report_path = settings.out_dir + "/report.json";
    std::ofstream out(rep.report_path);
    if (!out) throw std::runtime_error(rep.report_path + ": cannot open for writing");
    out << rep.to_json();
    if (!out) throw std::runtime_error(rep.report_path + ": write failed");
  }
  return rep;
}

void write_trajectory_csv(const std::string& path, const Scenario& sc, AuctionKind kind,
                          const PriceVector& pv, const Trajectory& trajectory) {
  (void)kind;
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "slot,user,relay,bid,power,payoff\n";
  const int I = sc.num_users();
  const int K = sc.num_relays();
  for (std::size_t t = 0; t < trajectory.bids.size(); ++t) {
    const BidProfile& bids = trajectory.bids[t];
    const Eigen::MatrixXd powers = allocate(sc, pv, bids);
    const Eigen::VectorXd& payoffs = trajectory.payoffs[t];
    for (int i = 0; i < I; ++i)
      for (int k = 0; k < K; ++k) {
        if (!(bids(i, k) > 0.0)) continue;
        out << t << ',' << i << ',' << k << ',' << format_number(bids(i, k)) << ','
            << format_number(powers(k, i)) << ',' << format_number(payoffs(i)) << '\n';
      }
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

CsvTrajectory read_trajectory_csv(const std::string& path, int num_users, int num_relays) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open trajectory file");
  std::string line;
  if (!std::getline(in, line) || line != "slot,user,relay,bid,power,payoff")
    throw std::runtime_error(path + ": unexpected CSV header");

  CsvTrajectory out;
  int current = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int slot = 0, user = 0, relay = 0;
    double bid = 0.0, power = 0.0, payoff = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf,%lf", &slot, &user, &relay, &bid, &power,
                    &payoff) != 6)
      throw std::runtime_error(path + ": malformed row at line " + std::to_string(line_no));
    if (user < 0 || user >= num_users || relay < 0 || relay >= num_relays)
      throw std::runtime_error(path + ": index out of range at line " + std::to_string(line_no));
    if (slot != current) {
      if (slot < current)
        throw std::runtime_error(path + ": rows out of slot order at line " +
                                 std::to_string(line_no));
      current = slot;
      out.slots.push_back(slot);
      out.bids.emplace_back(BidProfile::Zero(num_users, num_relays));
      out.powers.emplace_back(Eigen::MatrixXd::Zero(num_relays, num_users));
      out.payoffs.emplace_back(Eigen::VectorXd::Zero(num_users));
    }
    out.bids.back()(user, relay) = bid;
    out.powers.back()(relay, user) = power;
    out.payoffs.back()(user) = payoff;
  }
  return out;
}

SweepResult sweep_prices(const LoadedScenario& loaded, int relay,
                         const std::vector<double>& price_grid) {
  const int K = loaded.scenario.num_relays();
  if (relay < 0 || relay >= K) throw std::out_of_range("relay: index out of range");
  if (price_grid.empty()) throw std::invalid_argument("price_grid: must be nonempty");
  for (std::size_t i = 0; i < price_grid.size(); ++i) {
    if (!(price_grid[i] > 0.0) || !std::isfinite(price_grid[i]))
      throw std::invalid_argument("price_grid: entries must be finite and > 0");
    if (i > 0 && !(price_grid[i] > price_grid[i - 1]))
      throw std::invalid_argument("price_grid: must be strictly increasing");
  }

  SweepResult res;
  res.relay = relay;
  res.points.resize(price_grid.size());

  const auto eval_point = [&](std::size_t idx) {
    LoadedScenario pt = loaded;
    pt.prices.prices(relay) = price_grid[idx];
    SweepPoint p;
    p.price = price_grid[idx];
    p.demand = aggregate_demand(pt.scenario, relay, pt.kind, p.price);
    const Trajectory traj = run(pt.scenario, pt.kind, pt.prices, pt.schedule, pt.bounds,
                                std::nullopt, pt.tol, pt.max_slots);
    p.converged = traj.converged;
    const Eigen::MatrixXd powers = allocate(pt.scenario, pt.prices, traj.final_bids);
    p.utilization = powers.row(relay).sum() / pt.scenario.relays[relay].total_power;
    res.points[idx] = p;
  };

  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, 16u);
  threads = std::min<unsigned>(threads, static_cast<unsigned>(price_grid.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < price_grid.size(); ++i) eval_point(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < price_grid.size(); i += threads) eval_point(i);
      });
    for (auto& th : pool) th.join();
  }

  res.threshold_bisection = relay_threshold_price(loaded.scenario, relay, loaded.kind);

  int last_saturated = -1;
  for (std::size_t i = 0; i < res.points.size(); ++i)
    if (res.points[i].demand >= 1.0) last_saturated = static_cast<int>(i);
  if (last_saturated >= 0 && last_saturated + 1 < static_cast<int>(res.points.size())) {
    res.has_bracket = true;
    res.bracket_lower = res.points[last_saturated].price;
    res.bracket_upper = res.points[last_saturated + 1].price;
  }
  return res;
}

}  // namespace relayauction
