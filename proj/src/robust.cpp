#include "decoykit/robust.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "decoykit/bounds.hpp"

namespace decoykit {

namespace {

ProtocolSpec perturbed(const ProtocolSpec& protocol,
                       const std::vector<std::size_t>& free_levels,
                       const std::vector<double>& u, unsigned corner) {
  ProtocolSpec p = protocol;
  for (std::size_t b = 0; b < free_levels.size(); ++b) {
    const std::size_t j = free_levels[b];
    const double sign = (corner >> b) & 1u ? +1.0 : -1.0;
    p.levels[j].mu = protocol.levels[j].mu * (1.0 + sign * u[j]);
  }
  return p;
}

}  // namespace

SpsBounds bounds_under_uncertainty(const ProtocolSpec& protocol,
                                   const ObservationBounds& obs,
                                   const SystemParams& params,
                                   const std::vector<double>& u_per_level) {
  if (u_per_level.size() != protocol.levels.size())
    throw std::invalid_argument("uncertainty vector size mismatch");
  for (double u : u_per_level)
    if (!(u >= 0.0 && u < 1.0))
      throw std::domain_error("intensity uncertainty must lie in [0,1)");

  std::vector<std::size_t> free_levels;
  for (std::size_t j = 0; j < protocol.levels.size(); ++j)
    if (protocol.levels[j].mu > 0.0 && u_per_level[j] > 0.0)
      free_levels.push_back(j);

  if (free_levels.empty())
    return solve_sps_bounds(protocol, obs, params.k_max);

  SpsBounds worst;
  const unsigned corners = 1u << free_levels.size();
  for (unsigned corner = 0; corner < corners; ++corner) {
    const ProtocolSpec p =
        perturbed(protocol, free_levels, u_per_level, corner);
    SpsBounds b;
    try {
      b = solve_sps_bounds(p, obs, params.k_max);
    } catch (const InconsistentObservations& e) {
      std::ostringstream os;
      os << e.what() << " (uncertainty corner " << corner << ")";
      throw InconsistentObservations(os.str());
    }
    if (corner == 0) {
      worst = b;
      continue;
    }
    for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
      worst.p_single[j] = std::min(worst.p_single[j], b.p_single[j]);
      worst.p_dark[j] = std::min(worst.p_dark[j], b.p_dark[j]);
    }
    worst.b1_max = std::max(worst.b1_max, b.b1_max);
    worst.lp_iterations += b.lp_iterations;
  }
  return worst;
}

SpsBounds bounds_under_uncertainty(const ProtocolSpec& protocol,
                                   const ObservationBounds& obs,
                                   const SystemParams& params, double u) {
  return bounds_under_uncertainty(
      protocol, obs, params,
      std::vector<double>(protocol.levels.size(), u));
}

}  // namespace decoykit
