#include "decoykit/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace decoykit {

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 50000;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

void check_bound_args(double s, double t, double eps) {
  if (!(t > 0.0) || !std::isfinite(t))
    throw std::domain_error("confidence bound: trials must be positive");
  if (!(s >= 0.0) || !(s <= t))
    throw std::domain_error("confidence bound: need 0 <= successes <= trials");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("confidence bound: eps must lie in (0,1)");
}

}  // namespace

double h2(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("h2: argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("regularized_incomplete_beta: a and b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double bound_lower(double successes, double trials, double eps) {
  check_bound_args(successes, trials, eps);
  if (successes <= 0.0) return 0.0;
  // Pr[Bin(t,p) >= s] = I_p(s, t-s+1); solve I_p = eps for p.
  const double a = successes;
  const double b = trials - successes + 1.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, mid) < eps)
      lo = mid;
    else
      hi = mid;
  }
  return lo;  // conservative side
}

double bound_upper(double successes, double trials, double eps) {
  check_bound_args(successes, trials, eps);
  if (successes >= trials) return 1.0;
  // Pr[Bin(t,p) <= s] = 1 - I_p(s+1, t-s); solve I_p = 1 - eps for p.
  const double a = successes + 1.0;
  const double b = trials - successes;
  const double target = 1.0 - eps;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_incomplete_beta(a, b, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;  // conservative side
}

ObservationBounds observation_bounds(const SessionTally& tally, double eps) {
  ObservationBounds obs;
  obs.levels.reserve(tally.levels.size());
  for (const auto& lv : tally.levels) {
    LevelBounds b;
    if (lv.sent > 0.0) {
      b.y_lo = bound_lower(lv.received, lv.sent, eps);
      b.y_hi = bound_upper(lv.received, lv.sent, eps);
      b.b_lo = bound_lower(lv.errors, lv.sent, eps);
      b.b_hi = bound_upper(lv.errors, lv.sent, eps);
    }
    obs.levels.push_back(b);
  }
  return obs;
}

double binomial_count_lower(double trials, double p, double eps) {
  if (!(trials >= 0.0) || !std::isfinite(trials))
    throw std::domain_error("binomial_count_lower: bad trials");
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("binomial_count_lower: p must lie in (0,1)");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::domain_error("binomial_count_lower: eps must lie in (0,1)");
  if (trials <= 0.0) return 0.0;
  const double target = 1.0 - eps;
  // Pr[Bin(n,p) >= m] = I_p(m, n-m+1), decreasing in m; tail(0) == 1.
  if (regularized_incomplete_beta(trials, 1.0, p) >= target) return trials;
  double lo = 0.0, hi = trials;
  while (hi - lo > 1e-12 * std::max(1.0, trials)) {
    const double mid = 0.5 * (lo + hi);
    const double tail =
        mid <= 0.0 ? 1.0
                   : regularized_incomplete_beta(mid, trials - mid + 1.0, p);
    if (tail >= target)
      lo = mid;
    else
      hi = mid;
  }
  return lo;  // conservative side
}

}  // namespace decoykit
