#pragma once

#include <Eigen/Dense>
#include <vector>

namespace relayauction {

/// 2-D node coordinates in meters. Only used when channel gains are derived
/// from geometry; the core formulas work on gains directly.
struct Position {
  double x = 0.0;
  double y = 0.0;
};

/// A source-destination pair. The source transmits with fixed power in
/// phase 1; the destination combines the direct and relayed copies.
struct User {
  double source_power = 1.0;  // P_s [W]
};

/// A relay with a fixed total transmit power budget shared across users.
struct Relay {
  double total_power = 1.0;  // P_r [W]
};

/// Link gains: g_sd[i] source_i -> dest_i, g_sr(i,k) source_i -> relay_k,
/// g_rd(k,i) relay_k -> dest_i. All dimensionless power gains >= 0.
struct ChannelGains {
  Eigen::VectorXd g_sd;  // length I
  Eigen::MatrixXd g_sr;  // I x K
  Eigen::MatrixXd g_rd;  // K x I
};

/// All physical parameters of one network instance.
///
/// priority(i,k) is the weight q_ik a relay attaches to user i; it scales
/// the per-SNR price in the SNR auction and the fairness condition.
struct Scenario {
  std::vector<User> users;
  std::vector<Relay> relays;
  ChannelGains gains;
  double bandwidth = 1.0;            // W [Hz]
  double noise_power = 1.0;          // sigma^2 [W]
  Eigen::MatrixXd priority;          // I x K, entries > 0
  double activity_threshold = 1e-12; // relay power below this counts as "off"

  int num_users() const { return static_cast<int>(users.size()); }
  int num_relays() const { return static_cast<int>(relays.size()); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Uniform priority matrix helper (q_ik = q for all i,k).
  static Eigen::MatrixXd uniform_priority(int num_users, int num_relays, double q = 1.0);
};

/// SNR of the direct link of user i in phase 1: P_s * g_sd / sigma^2.
double direct_snr(const Scenario& sc, int user);

/// Additional post-combining SNR user i gains when relay k spends power p
/// on it. Increasing and concave in p, bounded by P_s * g_sr / sigma^2.
double relay_snr_increment(const Scenario& sc, int user, int relay, double power);

/// Closed-form d(relay_snr_increment)/dp, used by finite-difference checks.
double relay_snr_increment_derivative(const Scenario& sc, int user, int relay, double power);

/// Rate of user i under maximal ratio combining when relay k transmits
/// relay_powers[k] to it. Each active relay costs one extra channel use,
/// so the log term is divided by (#active relays + 1). A power at or below
/// the scenario's activity threshold counts as inactive.
double total_rate(const Scenario& sc, int user, const Eigen::VectorXd& relay_powers);

/// max{ total_rate(powers) - total_rate(0), 0 }.
double rate_increase(const Scenario& sc, int user, const Eigen::VectorXd& relay_powers);

/// Distance-power-law gains G = d^(-exponent) for every link the model
/// uses (source->own destination, source->relay, relay->destination).
/// Throws if any used link has coincident endpoints.
ChannelGains gains_from_positions(const std::vector<Position>& sources,
                                  const std::vector<Position>& destinations,
                                  const std::vector<Position>& relays,
                                  double path_loss_exponent);

}  // namespace relayauction
