#pragma once

#include <stdexcept>
#include <vector>

#include "decoykit/model.hpp"

namespace decoykit {

/// Raised when the observation intervals admit no channel at all, which
/// signals a corrupted tally or wrong intensities.
class InconsistentObservations : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Truncated Poisson weights for one level: coeff[k] = e^-mu mu^k / k! for
/// k < k_max, and the leftover tail mass so that sum(coeff) + tail == 1.
struct PoissonRow {
  std::vector<double> coeff;
  double tail = 0.0;
};

PoissonRow poisson_row(double mu, int k_max);

/// Minimum of the yield variable with index objective_k over all channels
/// consistent with the observations. Truncation keeps the program a sound
/// relaxation: each row's lower side assumes tail yields of 1, the upper
/// side tail yields of 0.
double min_yield_value(const ProtocolSpec& protocol,
                       const ObservationBounds& obs, int k_max,
                       int objective_k);

/// P_j^S = e^-mu_j mu_j min(y1), per level.
std::vector<double> min_single_photon(const ProtocolSpec& protocol,
                                      const ObservationBounds& obs, int k_max);

/// P_j^D = e^-mu_j min(y0), per level.
std::vector<double> min_dark(const ProtocolSpec& protocol,
                             const ObservationBounds& obs, int k_max);

/// Supremum of c1/y1 over channels consistent with both yield and error
/// observations, via feasibility bisection on t with the added row
/// c1 - t y1 >= 0. Bisection tolerance 1e-6 absolute; returns 1 when y1 = 0
/// cannot be excluded.
double max_b1(const ProtocolSpec& protocol, const ObservationBounds& obs,
              int k_max);

/// Feasibility of the joint yield/error polytope with the ratio row at t.
/// Exposed for the bisection-monotonicity property tests.
bool b1_ratio_feasible(const ProtocolSpec& protocol,
                       const ObservationBounds& obs, int k_max, double t);

/// Runs all three programs.
SpsBounds solve_sps_bounds(const ProtocolSpec& protocol,
                           const ObservationBounds& obs, int k_max);

}  // namespace decoykit
