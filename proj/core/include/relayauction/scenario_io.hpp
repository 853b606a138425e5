#pragma once

#include <stdexcept>
#include <string>

#include "relayauction/auction.hpp"
#include "relayauction/channel.hpp"
#include "relayauction/dynamics.hpp"

namespace relayauction {

/// Raised on any scenario-file problem; the message names the offending
/// field or file.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scenario file bundles the physical instance with the auction and
/// dynamics settings used to run it.
struct LoadedScenario {
  Scenario scenario;
  AuctionKind kind = AuctionKind::SnrAuction;
  PriceVector prices;
  Schedule schedule;
  Bounds bounds;
  double tol = 1e-9;
  int max_slots = 100000;
};

/// Parses a JSON scenario document. Sections: users, relays, channel,
/// system, auction, dynamics (the last two optional). The channel section
/// must carry exactly one of an explicit gain set or a path-loss exponent
/// with node coordinates. See README for the full field list.
LoadedScenario parse_scenario(const std::string& json_text);

/// parse_scenario applied to a file's contents.
LoadedScenario load_scenario(const std::string& path);

/// Inverse of parse_scenario for programmatic scenario generation; emits
/// explicit gains.
std::string scenario_to_json(const LoadedScenario& loaded);

}  // namespace relayauction
