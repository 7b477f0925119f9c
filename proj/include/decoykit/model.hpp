#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace decoykit {

/// One signal intensity level of a decoy-state protocol.
struct IntensityLevel {
  double mu = 0.0;           ///< mean photon number of the level
  double probability = 0.0;  ///< occurrence probability among all signals
  bool encodes_key = false;  ///< whether sifted bits of this level feed the key
  /// Indistinguishability probabilities Q_{j,k} indexed by photon number k.
  /// Absent means the level is fully indistinguishable (Q = 1 for every k).
  std::optional<std::vector<double>> q_row;
};

struct ProtocolSpec {
  std::vector<IntensityLevel> levels;

  std::size_t size() const { return levels.size(); }

  /// Index of the highest-intensity key-encoding level, or -1 if none.
  int highest_key_level() const;
  /// Indices of all key-encoding levels.
  std::vector<std::size_t> key_levels() const;
};

struct SystemParams {
  double epsilon = 1e-7;    ///< per-bound failure probability
  double n_total = 1e10;    ///< session length N (signals sent)
  double y0 = 0.0;          ///< dark/background click probability per slot
  double visibility = 1.0;  ///< interference visibility V
  double eta = 1.0;         ///< channel transmission probability
  double f_ec = 1.2;        ///< error-correction inefficiency
  int k_max = 9;            ///< photon-number truncation
  double sift = 0.5;        ///< fraction of detections surviving sifting
};

/// Per-level session counts. Real-valued so expectation-mode tallies flow
/// through the same pipeline as sampled integer counts.
struct LevelTally {
  double sent = 0.0;      // N_j
  double received = 0.0;  // C_j (after sifting)
  double errors = 0.0;    // E_j (after sifting)
};

struct SessionTally {
  std::vector<LevelTally> levels;
  double total_sent() const;
};

/// Confidence interval on a level's yield and error probability per sent
/// signal.
struct LevelBounds {
  double y_lo = 0.0;  // Y^-_j
  double y_hi = 1.0;  // Y^+_j
  double b_lo = 0.0;  // B^-_j
  double b_hi = 1.0;  // B^+_j
};

struct ObservationBounds {
  std::vector<LevelBounds> levels;
};

/// Outputs of the decoy-state optimization programs.
struct SpsBounds {
  std::vector<double> p_single;  ///< P_j^S, per level
  std::vector<double> p_dark;    ///< P_j^D, per level
  double b1_max = 1.0;           ///< upper bound on the single-photon BER
  // solver diagnostics
  long lp_iterations = 0;
  int bisection_steps = 0;
};

struct LevelRate {
  double single_photons = 0.0;  // S_j
  double dark_counts = 0.0;     // D_j
  double ec_cost = 0.0;
  double pa_cost = 0.0;
  double ber = 0.0;
  bool skipped = false;  // key level with no received counts
};

struct RateReport {
  double key_length = 0.0;  ///< K in bits
  double rate = 0.0;        ///< R = K / N
  std::vector<LevelRate> levels;
  double f_pa = 1.0;  ///< 1.0 when the PA term vanishes
  double b1_max = 0.0;
  bool clamped = false;  ///< pre-clamp key-length sum was negative
  int bound_applications = 0;
};

/// Checks every protocol and parameter invariant. Returns human-readable
/// violation descriptions; empty means valid. Total: never throws on finite
/// (or NaN) numeric input.
std::vector<std::string> validate(const ProtocolSpec& protocol,
                                  const SystemParams& params);

/// Tally consistency against a protocol and session length.
std::vector<std::string> validate_tally(const SessionTally& tally,
                                        const ProtocolSpec& protocol,
                                        const SystemParams& params);

}  // namespace decoykit
