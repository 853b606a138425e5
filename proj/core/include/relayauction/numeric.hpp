#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace relayauction {

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section maximization of f on [lo, hi]. Assumes f is unimodal
/// there (concave restrictions qualify). Endpoints are evaluated too, so
/// boundary maxima are returned exactly.
template <typename F>
ScalarMax golden_section_max(F&& f, double lo, double hi, double x_tol) {
  if (!(hi >= lo)) throw std::invalid_argument("golden_section_max: hi < lo");
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  ScalarMax best{lo, f(lo)};
  const double f_hi = f(hi);
  if (f_hi > best.value) best = {hi, f_hi};
  if (hi - lo <= x_tol) return best;

  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  if (fc > best.value) best = {c, fc};
  if (fd > best.value) best = {d, fd};
  while (b - a > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      if (fc > best.value) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      if (fd > best.value) best = {d, fd};
    }
  }
  return best;
}

/// Bisection for a root of g on [lo, hi] given g(lo) and g(hi) with opposite
/// signs. Stops when the bracket width drops below rel_tol * |midpoint|
/// (plus a tiny absolute floor). Returns the midpoint of the final bracket.
template <typename G>
double bisect_root(G&& g, double lo, double hi, double rel_tol) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0) == (ghi > 0))
    throw std::invalid_argument("bisect_root: no sign change over bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::abs(mid) + 1e-300) return mid;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Bisection on a monotone predicate: pred(lo) must be true, pred(hi) false.
/// Returns the crossing point to relative tolerance rel_tol.
inline double bisect_predicate(const std::function<bool(double)>& pred, double lo, double hi,
                               double rel_tol) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::abs(mid) + 1e-300) return mid;
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace relayauction
