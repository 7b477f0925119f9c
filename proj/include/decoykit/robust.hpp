#pragma once

#include <vector>

#include "decoykit/model.hpp"

namespace decoykit {

/// Worst-case decoy bounds when the nonzero intensities are known only to a
/// relative half-width U. The observations stay fixed; only the program
/// coefficients move. Every nonzero level is evaluated at its (1-U) and
/// (1+U) endpoints (4 corners for the usual two nonzero levels), taking the
/// per-level minimum of P^S and P^D and the maximum of b1 across corners.
/// The vacuum level is never perturbed.
SpsBounds bounds_under_uncertainty(const ProtocolSpec& protocol,
                                   const ObservationBounds& obs,
                                   const SystemParams& params, double u);

/// Extension: one relative half-width per level (vacuum entries ignored).
SpsBounds bounds_under_uncertainty(const ProtocolSpec& protocol,
                                   const ObservationBounds& obs,
                                   const SystemParams& params,
                                   const std::vector<double>& u_per_level);

}  // namespace decoykit
