#include "relayauction/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace relayauction {

namespace {

using nlohmann::json;

const json& require_field(const json& obj, const char* name, const std::string& section) {
  const auto it = obj.find(name);
  if (it == obj.end()) throw ScenarioError(section + "." + name + ": missing");
  return *it;
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) throw ScenarioError(where + ": must be a number");
  return v.get<double>();
}

double positive_at(const json& v, const std::string& where) {
  const double x = number_at(v, where);
  if (!(x > 0.0) || !std::isfinite(x)) throw ScenarioError(where + ": must be finite and > 0");
  return x;
}

int integer_at(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ScenarioError(where + ": must be an integer");
  return v.get<int>();
}

Position position_at(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ScenarioError(where + ": expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

Eigen::VectorXd vector_at(const json& v, int n, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    throw ScenarioError(where + ": expected an array of length " + std::to_string(n));
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = number_at(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Eigen::MatrixXd matrix_at(const json& v, int rows, int cols, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    throw ScenarioError(where + ": expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd out(rows, cols);
  for (int r = 0; r < rows; ++r)
    out.row(r) = vector_at(v[r], cols, where + "[" + std::to_string(r) + "]").transpose();
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

LoadedScenario parse_document(const json& doc) {
  if (!doc.is_object()) throw ScenarioError("scenario: top level must be an object");

  LoadedScenario out;
  Scenario& sc = out.scenario;

  const json& users = require_field(doc, "users", "scenario");
  if (!users.is_array() || users.empty())
    throw ScenarioError("users: must be a nonempty array");
  const int I = static_cast<int>(users.size());

  std::vector<Position> sources(I), destinations(I);
  int coord_pairs = 0;
  for (int i = 0; i < I; ++i) {
    const std::string where = "users[" + std::to_string(i) + "]";
    const json& u = users[i];
    if (!u.is_object()) throw ScenarioError(where + ": must be an object");
    User user;
    user.source_power = positive_at(require_field(u, "source_power", where), where + ".source_power");
    sc.users.push_back(user);
    const bool has_src = u.contains("source");
    const bool has_dst = u.contains("destination");
    if (has_src != has_dst)
      throw ScenarioError(where + ": source and destination coordinates come as a pair");
    if (has_src) {
      sources[i] = position_at(u["source"], where + ".source");
      destinations[i] = position_at(u["destination"], where + ".destination");
      ++coord_pairs;
    }
  }

  const json& relays = require_field(doc, "relays", "scenario");
  if (!relays.is_array() || relays.empty())
    throw ScenarioError("relays: must be a nonempty array");
  const int K = static_cast<int>(relays.size());

  std::vector<Position> relay_pos(K);
  int relay_coords = 0;
  out.prices.prices.resize(K);
  out.prices.reserve_bids.resize(K);
  for (int k = 0; k < K; ++k) {
    const std::string where = "relays[" + std::to_string(k) + "]";
    const json& r = relays[k];
    if (!r.is_object()) throw ScenarioError(where + ": must be an object");
    Relay relay;
    relay.total_power = positive_at(require_field(r, "total_power", where), where + ".total_power");
    sc.relays.push_back(relay);
    out.prices.prices(k) = positive_at(require_field(r, "price", where), where + ".price");
    out.prices.reserve_bids(k) =
        r.contains("reserve_bid") ? positive_at(r["reserve_bid"], where + ".reserve_bid") : 1.0;
    if (r.contains("position")) {
      relay_pos[k] = position_at(r["position"], where + ".position");
      ++relay_coords;
    }
  }

  const json& channel = require_field(doc, "channel", "scenario");
  if (!channel.is_object()) throw ScenarioError("channel: must be an object");
  const bool has_gains = channel.contains("gains");
  const bool has_exponent = channel.contains("path_loss_exponent");
  const bool any_coords = coord_pairs > 0 || relay_coords > 0;
  if (has_gains == has_exponent)
    throw ScenarioError("channel: provide exactly one of gains or path_loss_exponent");
  if (has_gains && any_coords)
    throw ScenarioError("channel: explicit gains exclude node coordinates");
  if (has_gains) {
    const json& g = channel["gains"];
    if (!g.is_object()) throw ScenarioError("channel.gains: must be an object");
    sc.gains.g_sd =
        vector_at(require_field(g, "source_destination", "channel.gains"), I,
                  "channel.gains.source_destination");
    sc.gains.g_sr = matrix_at(require_field(g, "source_relay", "channel.gains"), I, K,
                              "channel.gains.source_relay");
    sc.gains.g_rd = matrix_at(require_field(g, "relay_destination", "channel.gains"), K, I,
                              "channel.gains.relay_destination");
  } else {
    const double exponent =
        positive_at(channel["path_loss_exponent"], "channel.path_loss_exponent");
    if (coord_pairs != I)
      throw ScenarioError("users: every user needs source/destination coordinates when the "
                          "channel uses path loss");
    if (relay_coords != K)
      throw ScenarioError("relays: every relay needs position coordinates when the channel "
                          "uses path loss");
    sc.gains = gains_from_positions(sources, destinations, relay_pos, exponent);
  }

  const json& system = require_field(doc, "system", "scenario");
  if (!system.is_object()) throw ScenarioError("system: must be an object");
  sc.bandwidth = positive_at(require_field(system, "bandwidth", "system"), "system.bandwidth");
  sc.noise_power =
      positive_at(require_field(system, "noise_power", "system"), "system.noise_power");
  if (system.contains("activity_threshold")) {
    sc.activity_threshold = number_at(system["activity_threshold"], "system.activity_threshold");
    if (sc.activity_threshold < 0.0 || !std::isfinite(sc.activity_threshold))
      throw ScenarioError("system.activity_threshold: must be finite and >= 0");
  }

  sc.priority = Scenario::uniform_priority(I, K);
  if (doc.contains("auction")) {
    const json& auction = doc["auction"];
    if (!auction.is_object()) throw ScenarioError("auction: must be an object");
    if (auction.contains("kind")) {
      const json& kind = auction["kind"];
      if (!kind.is_string()) throw ScenarioError("auction.kind: must be \"snr\" or \"power\"");
      const std::string name = kind.get<std::string>();
      if (name == "snr")
        out.kind = AuctionKind::SnrAuction;
      else if (name == "power")
        out.kind = AuctionKind::PowerAuction;
      else
        throw ScenarioError("auction.kind: must be \"snr\" or \"power\"");
    }
    if (auction.contains("priority")) {
      const json& q = auction["priority"];
      if (q.is_number())
        sc.priority = Scenario::uniform_priority(I, K, positive_at(q, "auction.priority"));
      else
        sc.priority = matrix_at(q, I, K, "auction.priority");
    }
  }

  out.schedule = make_schedule(ScheduleKind::Synchronous, I);
  out.bounds = Bounds::uniform(I, K);
  if (doc.contains("dynamics")) {
    const json& dyn = doc["dynamics"];
    if (!dyn.is_object()) throw ScenarioError("dynamics: must be an object");

    std::uint64_t seed = 0;
    if (dyn.contains("seed")) {
      if (!dyn["seed"].is_number_integer()) throw ScenarioError("dynamics.seed: must be an integer");
      seed = dyn["seed"].get<std::uint64_t>();
    }

    std::string name = "synchronous";
    if (dyn.contains("schedule")) {
      if (!dyn["schedule"].is_string())
        throw ScenarioError("dynamics.schedule: must be a schedule name");
      name = dyn["schedule"].get<std::string>();
    }
    int bound = 0;
    if (dyn.contains("asynchronism_bound"))
      bound = integer_at(dyn["asynchronism_bound"], "dynamics.asynchronism_bound");

    if (name == "synchronous") {
      out.schedule = make_schedule(ScheduleKind::Synchronous, I, bound, seed);
    } else if (name == "round_robin") {
      out.schedule = make_schedule(ScheduleKind::RoundRobin, I, bound, seed);
    } else if (name == "bernoulli") {
      if (!dyn.contains("activation_probabilities"))
        throw ScenarioError("dynamics.activation_probabilities: required for bernoulli schedules");
      const json& probs = dyn["activation_probabilities"];
      Eigen::VectorXd p;
      if (probs.is_number())
        p = Eigen::VectorXd::Constant(I, number_at(probs, "dynamics.activation_probabilities"));
      else
        p = vector_at(probs, I, "dynamics.activation_probabilities");
      if (bound <= 0)
        throw ScenarioError("dynamics.asynchronism_bound: required for bernoulli schedules");
      out.schedule = make_bernoulli_schedule(I, p, bound, seed);
    } else if (name == "explicit_sets") {
      if (!dyn.contains("update_sets"))
        throw ScenarioError("dynamics.update_sets: required for explicit_sets schedules");
      const json& sets = dyn["update_sets"];
      if (!sets.is_array() || sets.empty())
        throw ScenarioError("dynamics.update_sets: must be a nonempty array of user lists");
      std::vector<std::vector<int>> pattern;
      for (std::size_t t = 0; t < sets.size(); ++t) {
        const std::string where = "dynamics.update_sets[" + std::to_string(t) + "]";
        if (!sets[t].is_array()) throw ScenarioError(where + ": must be an array of user indices");
        std::vector<int> slot;
        for (std::size_t j = 0; j < sets[t].size(); ++j)
          slot.push_back(integer_at(sets[t][j], where + "[" + std::to_string(j) + "]"));
        pattern.push_back(std::move(slot));
      }
      if (bound <= 0) {
        // default to the tightest bound the pattern satisfies
        std::vector<std::vector<int>> slots_of(I);
        const int period = static_cast<int>(pattern.size());
        for (int t = 0; t < period; ++t)
          for (int i : pattern[t])
            if (i >= 0 && i < I) slots_of[i].push_back(t);
        bound = 1;
        for (int i = 0; i < I; ++i) {
          const auto& slots = slots_of[i];
          if (slots.empty()) continue;
          int gap = slots.front() + period - slots.back();
          for (std::size_t j = 1; j < slots.size(); ++j)
            gap = std::max(gap, slots[j] - slots[j - 1]);
          bound = std::max(bound, gap);
        }
      }
      out.schedule = make_explicit_schedule(I, std::move(pattern), bound);
      out.schedule.rng_seed = seed;
    } else {
      throw ScenarioError("dynamics.schedule: unknown schedule \"" + name + "\"");
    }

    if (dyn.contains("bounds")) {
      const json& b = dyn["bounds"];
      if (!b.is_object()) throw ScenarioError("dynamics.bounds: must be an object");
      const json& lower = require_field(b, "lower", "dynamics.bounds");
      const json& upper = require_field(b, "upper", "dynamics.bounds");
      out.bounds.lower = lower.is_number()
                             ? Eigen::MatrixXd::Constant(I, K, number_at(lower, "dynamics.bounds.lower"))
                             : matrix_at(lower, I, K, "dynamics.bounds.lower");
      out.bounds.upper = upper.is_number()
                             ? Eigen::MatrixXd::Constant(I, K, number_at(upper, "dynamics.bounds.upper"))
                             : matrix_at(upper, I, K, "dynamics.bounds.upper");
    }
    if (dyn.contains("tol")) out.tol = positive_at(dyn["tol"], "dynamics.tol");
    if (dyn.contains("max_slots")) {
      out.max_slots = integer_at(dyn["max_slots"], "dynamics.max_slots");
      if (out.max_slots < 1) throw ScenarioError("dynamics.max_slots: must be >= 1");
    }
  }

  try {
    sc.validate();
    out.prices.validate(K);
    out.schedule.validate();
    out.bounds.validate(I, K);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  return out;
}

}  // namespace

LoadedScenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return parse_document(doc);
}

LoadedScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open scenario file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

std::string scenario_to_json(const LoadedScenario& loaded) {
  const Scenario& sc = loaded.scenario;
  const int I = sc.num_users();
  const int K = sc.num_relays();

  json doc;
  doc["users"] = json::array();
  for (int i = 0; i < I; ++i) doc["users"].push_back({{"source_power", sc.users[i].source_power}});

  doc["relays"] = json::array();
  for (int k = 0; k < K; ++k)
    doc["relays"].push_back({{"total_power", sc.relays[k].total_power},
                             {"price", loaded.prices.prices(k)},
                             {"reserve_bid", loaded.prices.reserve_bids(k)}});

  json g_sd = json::array();
  for (int i = 0; i < I; ++i) g_sd.push_back(sc.gains.g_sd(i));
  doc["channel"]["gains"] = {{"source_destination", std::move(g_sd)},
                             {"source_relay", matrix_to_json(sc.gains.g_sr)},
                             {"relay_destination", matrix_to_json(sc.gains.g_rd)}};

  doc["system"] = {{"bandwidth", sc.bandwidth},
                   {"noise_power", sc.noise_power},
                   {"activity_threshold", sc.activity_threshold}};

  doc["auction"] = {{"kind", loaded.kind == AuctionKind::SnrAuction ? "snr" : "power"},
                    {"priority", matrix_to_json(sc.priority)}};

  json dyn;
  dyn["schedule"] = to_string(loaded.schedule.kind);
  dyn["asynchronism_bound"] = loaded.schedule.asynchronism_bound;
  dyn["seed"] = loaded.schedule.rng_seed;
  if (loaded.schedule.kind == ScheduleKind::Bernoulli) {
    json probs = json::array();
    for (int i = 0; i < I; ++i) probs.push_back(loaded.schedule.activation_probabilities(i));
    dyn["activation_probabilities"] = std::move(probs);
  }
  if (loaded.schedule.kind == ScheduleKind::ExplicitSets) dyn["update_sets"] = loaded.schedule.update_sets;
  dyn["bounds"] = {{"lower", matrix_to_json(loaded.bounds.lower)},
                   {"upper", matrix_to_json(loaded.bounds.upper)}};
  dyn["tol"] = loaded.tol;
  dyn["max_slots"] = loaded.max_slots;
  doc["dynamics"] = std::move(dyn);

  return doc.dump(2) + "\n";
}

}  // namespace relayauction
