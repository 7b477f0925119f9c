#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "decoykit/model.hpp"

namespace decoykit {

struct StationaryChannel {
  double eta = 0.0;
  double y0 = 0.0;
  double visibility = 1.0;
};

/// A beamsplitter channel, or a frequency-weighted mixture of them (the
/// adversary picks one component per signal).
struct ChannelModel {
  struct Component {
    StationaryChannel channel;
    double frequency = 1.0;
  };
  std::vector<Component> components;

  static ChannelModel stationary(double eta, double y0, double visibility);
  static ChannelModel mixture(std::vector<Component> components);
  static ChannelModel from(const SystemParams& params);
};

/// Click probability for a k-photon signal: 1 - (1-y0)(1-eta)^k per
/// component, frequency-averaged.
double yield_k(const ChannelModel& channel, int k);

/// Erroneous-click probability for a k-photon signal:
/// y0/2 + (1-V)/2 * (1 - (1-eta)^k) per component, frequency-averaged.
double error_k(const ChannelModel& channel, int k);

/// Deterministic expectation-mode tally: N_j = N p_j and sifted click/error
/// expectations from the Poisson photon-number series.
SessionTally expected_tally(const ProtocolSpec& protocol,
                            const SystemParams& params,
                            const ChannelModel& channel);

/// Integer-count sampled tally; identical for identical seeds.
SessionTally sample_tally(const ProtocolSpec& protocol,
                          const SystemParams& params,
                          const ChannelModel& channel, std::uint64_t seed);

struct DetectorPreset {
  std::string name;
  double efficiency = 1.0;   // multiplies the channel eta
  double dark_prob = 0.0;    // per signal slot
  double optics_loss_db = 7.0;
};

/// Named presets: "snspd", "tes", "apd". Throws on unknown names.
DetectorPreset detector_preset(std::string_view name);

/// System parameters with the detector folded in at the given fiber length:
/// y0 from the preset, eta = 10^(-(optics + fiber)/10) * efficiency.
SystemParams apply_detector(const SystemParams& params,
                            const DetectorPreset& preset, double fiber_km,
                            double fiber_db_per_km = 0.2);

}  // namespace decoykit
