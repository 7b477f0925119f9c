#include "decoykit/distinguish.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "decoykit/bounds.hpp"
#include "decoykit/lp.hpp"
#include "decoykit/stats.hpp"

namespace decoykit {

namespace {

void check_q(const ProtocolSpec& protocol, const DistinguishabilityMatrix& q,
             int k_max) {
  if (q.q.size() != protocol.levels.size())
    throw std::invalid_argument("distinguishability matrix level mismatch");
  for (const auto& row : q.q) {
    if (row.size() != static_cast<std::size_t>(k_max))
      throw std::invalid_argument("distinguishability row width mismatch");
    for (double v : row)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error("Q entries must lie in [0,1]");
  }
}

// Variables: ybar_{j,k} blocks (j-major), then the shared y_k block.
// objective_level/objective_k select which ybar is minimized.
double solve_distinguishable(const ProtocolSpec& protocol,
                             const ObservationBounds& obs,
                             const DistinguishabilityMatrix& q, int k_max,
                             std::size_t objective_level, int objective_k) {
  const std::size_t levels = protocol.levels.size();
  const int n = static_cast<int>(levels) * k_max + k_max;
  const int shared_base = static_cast<int>(levels) * k_max;

  LpProblem p;
  p.objective.assign(n, 0.0);
  p.objective[objective_level * k_max + objective_k] = 1.0;
  p.var_lower.assign(n, 0.0);
  p.var_upper.assign(n, 1.0);

  for (std::size_t j = 0; j < levels; ++j) {
    const PoissonRow pr = poisson_row(protocol.levels[j].mu, k_max);
    std::vector<double> row(n, 0.0);
    for (int k = 0; k < k_max; ++k) row[j * k_max + k] = pr.coeff[k];
    p.add_row(std::move(row), obs.levels[j].y_lo - pr.tail,
              obs.levels[j].y_hi);
  }

  for (std::size_t j = 0; j < levels; ++j) {
    for (int k = 0; k < k_max; ++k) {
      const double qv = q.q[j][static_cast<std::size_t>(k)];
      if (qv <= 0.0) continue;  // both couplings are vacuous
      // y_k - Q ybar_{j,k} >= 0
      std::vector<double> r1(n, 0.0);
      r1[shared_base + k] = 1.0;
      r1[j * k_max + k] = -qv;
      p.add_row(std::move(r1), 0.0, LpProblem::infinity());
      // Q ybar_{j,k} - y_k >= Q - 1
      std::vector<double> r2(n, 0.0);
      r2[shared_base + k] = -1.0;
      r2[j * k_max + k] = qv;
      p.add_row(std::move(r2), qv - 1.0, LpProblem::infinity());
    }
  }

  const LpSolution sol = lp_solve(p);
  if (sol.status == LpSolution::Status::infeasible)
    throw InconsistentObservations(
        "observations inconsistent: distinguishable yield program is empty");
  if (!sol.optimal())
    throw std::runtime_error("distinguishable yield program did not solve");
  return std::clamp(sol.value, 0.0, 1.0);
}

}  // namespace

DistinguishabilityMatrix DistinguishabilityMatrix::all_indistinguishable(
    std::size_t levels, int k_max) {
  DistinguishabilityMatrix m;
  m.q.assign(levels, std::vector<double>(static_cast<std::size_t>(k_max), 1.0));
  return m;
}

DistinguishabilityMatrix DistinguishabilityMatrix::from_protocol(
    const ProtocolSpec& protocol, int k_max) {
  DistinguishabilityMatrix m =
      all_indistinguishable(protocol.levels.size(), k_max);
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    if (!protocol.levels[j].q_row) continue;
    const auto& row = *protocol.levels[j].q_row;
    for (int k = 0; k < k_max && k < static_cast<int>(row.size()); ++k)
      m.q[j][static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k)];
  }
  return m;
}

DistinguishabilityMatrix DistinguishabilityMatrix::four_laser(
    const ProtocolSpec& protocol, int k_max) {
  DistinguishabilityMatrix m =
      all_indistinguishable(protocol.levels.size(), k_max);
  int low = -1;
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    if (protocol.levels[j].mu <= 0.0) continue;
    if (low < 0 ||
        protocol.levels[j].mu < protocol.levels[static_cast<std::size_t>(low)].mu)
      low = static_cast<int>(j);
  }
  if (low < 0)
    throw std::invalid_argument("four_laser preset needs a nonzero level");
  for (int k = 0; k < k_max; ++k)
    m.q[static_cast<std::size_t>(low)][static_cast<std::size_t>(k)] =
        q_four_laser(k);
  return m;
}

double q_four_laser(int k) {
  if (k < 0) throw std::domain_error("q_four_laser: k must be >= 0");
  if (k <= 1) return 1.0;
  if (k == 2) return 0.75;
  return std::min(1.0, std::pow(2.0, -(k - 2)));
}

std::vector<double> min_single_photon_distinguishable(
    const ProtocolSpec& protocol, const ObservationBounds& obs,
    const DistinguishabilityMatrix& q, int k_max) {
  check_q(protocol, q, k_max);
  if (obs.levels.size() != protocol.levels.size())
    throw std::invalid_argument("observation/protocol size mismatch");
  std::vector<double> out(protocol.levels.size());
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const double v = solve_distinguishable(protocol, obs, q, k_max, j, 1);
    out[j] = std::exp(-protocol.levels[j].mu) * protocol.levels[j].mu * v;
  }
  return out;
}

std::vector<double> min_dark_distinguishable(const ProtocolSpec& protocol,
                                             const ObservationBounds& obs,
                                             const DistinguishabilityMatrix& q,
                                             int k_max) {
  check_q(protocol, q, k_max);
  if (obs.levels.size() != protocol.levels.size())
    throw std::invalid_argument("observation/protocol size mismatch");
  std::vector<double> out(protocol.levels.size());
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const double v = solve_distinguishable(protocol, obs, q, k_max, j, 0);
    out[j] = std::exp(-protocol.levels[j].mu) * v;
  }
  return out;
}

double b1_via_dark_subtraction(const SessionTally& tally, const SpsBounds& sps,
                               const SystemParams& params,
                               const ProtocolSpec& protocol) {
  const int key = protocol.highest_key_level();
  if (key < 0)
    throw std::invalid_argument("dark subtraction needs a key level");
  const std::size_t j = static_cast<std::size_t>(key);
  if (tally.levels.size() != protocol.levels.size() ||
      sps.p_single.size() != protocol.levels.size())
    throw std::invalid_argument("dark subtraction: input sizes do not match");

  const auto& t = tally.levels[j];
  if (!(t.sent > 0.0)) return 1.0;

  const double s_minus = t.sent * sps.p_single[j];
  if (!(s_minus > 0.0)) return 1.0;

  const double e_plus = t.sent * bound_upper(t.errors, t.sent, params.epsilon);
  const double d_minus = t.sent * sps.p_dark[j];
  const double dark_errors =
      d_minus > 0.0 ? binomial_count_lower(d_minus, 0.5, params.epsilon) : 0.0;

  return std::clamp((e_plus - dark_errors) / s_minus, 0.0, 1.0);
}

}  // namespace decoykit
