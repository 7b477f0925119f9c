#pragma once

#include <cstdint>

#include "decoykit/channel.hpp"
#include "decoykit/model.hpp"

namespace decoykit {

/// Full expectation-mode pipeline: tally -> observation bounds -> decoy
/// programs -> key rate.
double rate_of(const ProtocolSpec& protocol, const SystemParams& params,
               const ChannelModel& channel);

struct OptimizeOptions {
  int starts = 8;
  int max_evals_per_start = 400;
  double simplex_tol = 1e-4;  ///< stop when the simplex diameter shrinks below
  std::uint64_t seed = 0x6b6579726174ull;
  bool coordinate_refine = true;
  int jobs = 1;  ///< concurrent starts; results are reduced deterministically
};

struct OptimizeResult {
  ProtocolSpec protocol;
  double rate = 0.0;
  long evaluations = 0;
  int starts_run = 0;
};

/// Multi-start simplex search over intensities (log scale, capped at 2
/// photons) and the occurrence-probability simplex. For three or more
/// levels the lowest level is pinned to vacuum and only the highest level
/// encodes key; with one or two levels every level encodes key.
OptimizeResult optimize_protocol(const SystemParams& params,
                                 const ChannelModel& channel, int n_levels,
                                 const OptimizeOptions& options = {});

}  // namespace decoykit
