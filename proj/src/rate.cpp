#include "decoykit/rate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "decoykit/stats.hpp"

namespace decoykit {

double f_pa(double b1_max, double s_total) {
  if (!(b1_max >= 0.0 && b1_max <= 1.0))
    throw std::domain_error("f_pa: b1_max outside [0,1]");
  if (b1_max == 0.0) return std::numeric_limits<double>::infinity();
  if (!(s_total > 0.0))
    throw std::domain_error("f_pa: s_total must be positive when b1_max > 0");
  return 1.0 + 1.53 * std::pow(b1_max, -0.54) * std::pow(s_total, -0.44);
}

double pa_cost(double b1_max, double s_single, double s_total) {
  if (b1_max <= 0.0 || s_single <= 0.0 || s_total <= 0.0) return 0.0;
  return f_pa(b1_max, s_total) * s_single * h2(b1_max);
}

RateReport key_length(const SessionTally& tally, const SpsBounds& sps,
                      const SystemParams& params,
                      const ProtocolSpec& protocol) {
  const std::size_t levels = protocol.levels.size();
  if (tally.levels.size() != levels || sps.p_single.size() != levels ||
      sps.p_dark.size() != levels)
    throw std::invalid_argument("key_length: input sizes do not match");

  RateReport report;
  report.levels.resize(levels);
  report.b1_max = sps.b1_max;

  double s_total = 0.0;
  for (std::size_t j = 0; j < levels; ++j)
    if (protocol.levels[j].encodes_key)
      s_total += tally.levels[j].sent * sps.p_single[j];

  report.f_pa = (sps.b1_max > 0.0 && s_total > 0.0)
                    ? f_pa(sps.b1_max, s_total)
                    : 1.0;

  double sum = 0.0;
  for (std::size_t j = 0; j < levels; ++j) {
    if (!protocol.levels[j].encodes_key) continue;
    auto& row = report.levels[j];
    const auto& t = tally.levels[j];
    if (!(t.received > 0.0)) {
      row.skipped = true;  // BER undefined; level contributes nothing
      continue;
    }
    row.single_photons = t.sent * sps.p_single[j];
    row.dark_counts = t.sent * sps.p_dark[j];
    row.ber = t.errors / t.received;
    row.ec_cost = params.f_ec * t.received * h2(row.ber);
    row.pa_cost = pa_cost(sps.b1_max, row.single_photons, s_total);
    sum += row.single_photons + row.dark_counts - row.ec_cost - row.pa_cost;
  }

  report.clamped = sum < 0.0;
  report.key_length = std::max(0.0, sum);
  const double n = tally.total_sent();
  report.rate = n > 0.0 ? report.key_length / n : 0.0;
  return report;
}

}  // namespace decoykit
