#pragma once

#include <vector>

#include "decoykit/model.hpp"

namespace decoykit {

/// Per-level, per-photon-number indistinguishability probabilities.
struct DistinguishabilityMatrix {
  std::vector<std::vector<double>> q;  // [level][k], k < k_max

  static DistinguishabilityMatrix all_indistinguishable(std::size_t levels,
                                                        int k_max);
  /// Rows from the protocol's q_row entries; missing rows or entries default
  /// to 1 (indistinguishable).
  static DistinguishabilityMatrix from_protocol(const ProtocolSpec& protocol,
                                                int k_max);
  /// The single-extra-laser example: the lowest nonzero-intensity level gets
  /// the q_four_laser row, everything else stays indistinguishable.
  static DistinguishabilityMatrix four_laser(const ProtocolSpec& protocol,
                                             int k_max);
};

/// Indistinguishability of the extra low-intensity laser against the four
/// fixed-optics lasers: 1 for k <= 1, 3/4 for k == 2, 2^-(k-2) beyond.
double q_four_laser(int k);

/// P_j^S when levels are only partially indistinguishable: per-level yield
/// variables coupled to a shared set through
///   y_k >= Q_{j,k} ybar_{j,k}   and   1 - y_k >= Q_{j,k} (1 - ybar_{j,k}).
std::vector<double> min_single_photon_distinguishable(
    const ProtocolSpec& protocol, const ObservationBounds& obs,
    const DistinguishabilityMatrix& q, int k_max);

/// P_j^D analog (objective ybar_{j,0}).
std::vector<double> min_dark_distinguishable(const ProtocolSpec& protocol,
                                             const ObservationBounds& obs,
                                             const DistinguishabilityMatrix& q,
                                             int k_max);

/// Upper bound on the single-photon BER without the joint error program:
/// credit the key level with the dark-count errors it must contain. With
/// confidence 1-eps at least binomial_count_lower(D^-, 1/2, eps) of the
/// observed errors are dark errors; the rest are charged to the certified
/// single photons.
double b1_via_dark_subtraction(const SessionTally& tally, const SpsBounds& sps,
                               const SystemParams& params,
                               const ProtocolSpec& protocol);

}  // namespace decoykit
