#pragma once

#include "decoykit/model.hpp"

namespace decoykit {

/// Binary Shannon entropy in bits, with 0*log(0) == 0.
/// Throws std::domain_error outside [0,1].
double h2(double x);

/// Regularized incomplete beta function I_x(a,b), evaluated by continued
/// fraction. Accepts real (non-integer) a and b.
double regularized_incomplete_beta(double a, double b, double x);

/// One-sided Clopper-Pearson lower bound: the largest p such that
/// Pr[Binomial(trials, p) >= successes] <= eps. Real-valued successes are
/// accepted by evaluating the same beta-function expression at non-integer
/// arguments. Returns 0 when successes == 0.
double bound_lower(double successes, double trials, double eps);

/// Mirror upper bound; returns 1 when successes == trials.
double bound_upper(double successes, double trials, double eps);

/// Confidence intervals on each level's yield and error probability.
/// A level with no sent signals gets the vacuous interval [0,1].
ObservationBounds observation_bounds(const SessionTally& tally, double eps);

/// Largest m such that Pr[Binomial(trials, p) >= m] >= 1 - eps, extended to
/// real-valued trials. Used to subtract dark-count errors with confidence.
double binomial_count_lower(double trials, double p, double eps);

}  // namespace decoykit
