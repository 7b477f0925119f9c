#pragma once

#include "decoykit/model.hpp"

namespace decoykit {

/// Privacy-amplification inefficiency 1 + 1.53 b1^-0.54 S^-0.44.
/// Returns +infinity at b1 == 0 (the full PA term still tends to 0 there);
/// throws std::domain_error for s_total <= 0 with b1 > 0.
double f_pa(double b1_max, double s_total);

/// The full PA term s_single * f_pa * h2(b1), with the b1 -> 0 limit of 0.
double pa_cost(double b1_max, double s_single, double s_total);

/// Secret-key length and rate from a tally and the certified bounds. The
/// sum runs over key-encoding levels only; a key level with no received
/// counts contributes nothing and is flagged as skipped.
RateReport key_length(const SessionTally& tally, const SpsBounds& sps,
                      const SystemParams& params,
                      const ProtocolSpec& protocol);

}  // namespace decoykit
