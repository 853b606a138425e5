#include "relayauction/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace relayauction {

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw std::invalid_argument(message);
}

void check_user_index(const Scenario& sc, int user) {
  if (user < 0 || user >= sc.num_users())
    throw std::out_of_range("user index " + std::to_string(user) + " out of range");
}

void check_relay_index(const Scenario& sc, int relay) {
  if (relay < 0 || relay >= sc.num_relays())
    throw std::out_of_range("relay index " + std::to_string(relay) + " out of range");
}

}  // namespace

Eigen::MatrixXd Scenario::uniform_priority(int num_users, int num_relays, double q) {
  return Eigen::MatrixXd::Constant(num_users, num_relays, q);
}

void Scenario::validate() const {
  const int I = num_users();
  const int K = num_relays();
  require(I > 0, "users: at least one user required");
  require(K > 0, "relays: at least one relay required");
  require(bandwidth > 0 && std::isfinite(bandwidth), "bandwidth: must be finite and > 0");
  require(noise_power > 0 && std::isfinite(noise_power), "noise_power: must be finite and > 0");
  require(activity_threshold >= 0, "activity_threshold: must be >= 0");
  for (int i = 0; i < I; ++i)
    require(users[i].source_power > 0 && std::isfinite(users[i].source_power),
            "users[" + std::to_string(i) + "].source_power: must be finite and > 0");
  for (int k = 0; k < K; ++k)
    require(relays[k].total_power > 0 && std::isfinite(relays[k].total_power),
            "relays[" + std::to_string(k) + "].total_power: must be finite and > 0");
  require(gains.g_sd.size() == I, "gains.g_sd: length must equal number of users");
  require(gains.g_sr.rows() == I && gains.g_sr.cols() == K,
          "gains.g_sr: dimensions must be users x relays");
  require(gains.g_rd.rows() == K && gains.g_rd.cols() == I,
          "gains.g_rd: dimensions must be relays x users");
  require((gains.g_sd.array() >= 0).all() && gains.g_sd.allFinite(),
          "gains.g_sd: entries must be finite and >= 0");
  require((gains.g_sr.array() >= 0).all() && gains.g_sr.allFinite(),
          "gains.g_sr: entries must be finite and >= 0");
  require((gains.g_rd.array() >= 0).all() && gains.g_rd.allFinite(),
          "gains.g_rd: entries must be finite and >= 0");
  require(priority.rows() == I && priority.cols() == K,
          "priority: dimensions must be users x relays");
  require((priority.array() > 0).all() && priority.allFinite(),
          "priority: entries must be finite and > 0");
}

double direct_snr(const Scenario& sc, int user) {
  check_user_index(sc, user);
  return sc.users[user].source_power * sc.gains.g_sd(user) / sc.noise_power;
}

double relay_snr_increment(const Scenario& sc, int user, int relay, double power) {
  check_user_index(sc, user);
  check_relay_index(sc, relay);
  if (power < 0) throw std::invalid_argument("relay power must be >= 0");
  const double ps = sc.users[user].source_power;
  const double gsr = sc.gains.g_sr(user, relay);
  const double grd = sc.gains.g_rd(relay, user);
  const double s2 = sc.noise_power;
  const double denom = s2 * (power * grd + ps * gsr + s2);
  return power * ps * grd * gsr / denom;
}

double relay_snr_increment_derivative(const Scenario& sc, int user, int relay, double power) {
  check_user_index(sc, user);
  check_relay_index(sc, relay);
  if (power < 0) throw std::invalid_argument("relay power must be >= 0");
  const double ps = sc.users[user].source_power;
  const double gsr = sc.gains.g_sr(user, relay);
  const double grd = sc.gains.g_rd(relay, user);
  const double s2 = sc.noise_power;
  // d/dp of c1*p/(c2*p + c3) with c1 = ps*grd*gsr/s2, c2 = grd, c3 = ps*gsr + s2.
  const double c3 = ps * gsr + s2;
  const double root = grd * power + c3;
  return ps * grd * gsr * c3 / (s2 * root * root);
}

double total_rate(const Scenario& sc, int user, const Eigen::VectorXd& relay_powers) {
  check_user_index(sc, user);
  const int K = sc.num_relays();
  if (relay_powers.size() != K)
    throw std::invalid_argument("relay_powers: length must equal number of relays");
  double snr_sum = direct_snr(sc, user);
  int active = 0;
  for (int k = 0; k < K; ++k) {
    const double p = relay_powers(k);
    if (p < 0) throw std::invalid_argument("relay_powers: entries must be >= 0");
    snr_sum += relay_snr_increment(sc, user, k, p);
    if (p > sc.activity_threshold) ++active;
  }
  return sc.bandwidth * std::log2(1.0 + snr_sum) / (active + 1);
}

double rate_increase(const Scenario& sc, int user, const Eigen::VectorXd& relay_powers) {
  const double baseline =
      sc.bandwidth * std::log2(1.0 + direct_snr(sc, user));
  const double with_relays = total_rate(sc, user, relay_powers);
  return std::max(with_relays - baseline, 0.0);
}

namespace {

double link_gain(const Position& a, const Position& b, double exponent, const char* what) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double d = std::hypot(dx, dy);
  if (d <= 0.0)
    throw std::invalid_argument(std::string(what) + ": coincident endpoints give infinite gain");
  return std::pow(d, -exponent);
}

}  // namespace

ChannelGains gains_from_positions(const std::vector<Position>& sources,
                                  const std::vector<Position>& destinations,
                                  const std::vector<Position>& relays,
                                  double path_loss_exponent) {
  if (sources.size() != destinations.size())
    throw std::invalid_argument("positions: one destination per source required");
  if (path_loss_exponent <= 0)
    throw std::invalid_argument("path_loss_exponent: must be > 0");
  const int I = static_cast<int>(sources.size());
  const int K = static_cast<int>(relays.size());
  ChannelGains g;
  g.g_sd.resize(I);
  g.g_sr.resize(I, K);
  g.g_rd.resize(K, I);
  for (int i = 0; i < I; ++i) {
    g.g_sd(i) = link_gain(sources[i], destinations[i], path_loss_exponent, "source->destination");
    for (int k = 0; k < K; ++k) {
      g.g_sr(i, k) = link_gain(sources[i], relays[k], path_loss_exponent, "source->relay");
      g.g_rd(k, i) = link_gain(relays[k], destinations[i], path_loss_exponent, "relay->destination");
    }
  }
  return g;
}

}  // namespace relayauction
