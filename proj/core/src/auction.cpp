#include "relayauction/auction.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace relayauction {

const char* to_string(AuctionKind kind) {
  return kind == AuctionKind::SnrAuction ? "snr" : "power";
}

void validate_bids(const Scenario& sc, const BidProfile& bids) {
  if (bids.rows() != sc.num_users() || bids.cols() != sc.num_relays())
    throw std::invalid_argument("bids: dimensions must be users x relays");
  if (!bids.allFinite() || (bids.array() < 0).any())
    throw std::invalid_argument("bids: entries must be finite and >= 0");
}

PriceVector PriceVector::uniform(int num_relays, double price, double reserve_bid) {
  PriceVector pv;
  pv.prices = Eigen::VectorXd::Constant(num_relays, price);
  pv.reserve_bids = Eigen::VectorXd::Constant(num_relays, reserve_bid);
  return pv;
}

void PriceVector::validate(int num_relays) const {
  if (prices.size() != num_relays)
    throw std::invalid_argument("prices: length must equal number of relays");
  if (reserve_bids.size() != num_relays)
    throw std::invalid_argument("reserve_bids: length must equal number of relays");
  if (!prices.allFinite() || (prices.array() <= 0).any())
    throw std::invalid_argument("prices: entries must be finite and > 0");
  if (!reserve_bids.allFinite() || (reserve_bids.array() <= 0).any())
    throw std::invalid_argument("reserve_bids: entries must be finite and > 0");
}

Eigen::MatrixXd allocate(const Scenario& sc, const PriceVector& pv, const BidProfile& bids) {
  validate_bids(sc, bids);
  pv.validate(sc.num_relays());
  const int I = sc.num_users();
  const int K = sc.num_relays();
  Eigen::MatrixXd powers(K, I);
  for (int k = 0; k < K; ++k) {
    const double total = bids.col(k).sum() + pv.reserve_bids(k);
    for (int i = 0; i < I; ++i)
      powers(k, i) = bids(i, k) / total * sc.relays[k].total_power;
  }
  return powers;
}

double payment_from_powers(const Scenario& sc, AuctionKind kind, const PriceVector& pv, int user,
                           const Eigen::VectorXd& user_powers) {
  const int K = sc.num_relays();
  if (user_powers.size() != K)
    throw std::invalid_argument("user_powers: length must equal number of relays");
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    if (kind == AuctionKind::SnrAuction) {
      total += pv.prices(k) * sc.priority(user, k) *
               relay_snr_increment(sc, user, k, user_powers(k));
    } else {
      total += pv.prices(k) * user_powers(k);
    }
  }
  return total;
}

double payment(const Scenario& sc, AuctionKind kind, const PriceVector& pv, int user,
               const Eigen::MatrixXd& powers) {
  if (powers.rows() != sc.num_relays() || powers.cols() != sc.num_users())
    throw std::invalid_argument("powers: dimensions must be relays x users");
  return payment_from_powers(sc, kind, pv, user, powers.col(user));
}

double payoff_from_powers(const Scenario& sc, AuctionKind kind, const PriceVector& pv, int user,
                          const Eigen::VectorXd& user_powers) {
  return rate_increase(sc, user, user_powers) -
         payment_from_powers(sc, kind, pv, user, user_powers);
}

double payoff(const Scenario& sc, AuctionKind kind, const PriceVector& pv, const BidProfile& bids,
              int user) {
  const Eigen::MatrixXd powers = allocate(sc, pv, bids);
  return payoff_from_powers(sc, kind, pv, user, powers.col(user));
}

Allocation evaluate_allocation(const Scenario& sc, AuctionKind kind, const PriceVector& pv,
                               const BidProfile& bids) {
  const int I = sc.num_users();
  Allocation a;
  a.powers = allocate(sc, pv, bids);
  a.rates.resize(I);
  a.payments.resize(I);
  a.payoffs.resize(I);
  for (int i = 0; i < I; ++i) {
    const Eigen::VectorXd col = a.powers.col(i);
    a.rates(i) = total_rate(sc, i, col);
    a.payments(i) = payment_from_powers(sc, kind, pv, i, col);
    a.payoffs(i) = rate_increase(sc, i, col) - a.payments(i);
  }
  return a;
}

}  // namespace relayauction
