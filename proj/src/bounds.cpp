#include "decoykit/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "decoykit/lp.hpp"

namespace decoykit {

namespace {

constexpr double kB1Tol = 1e-6;

void check_shapes(const ProtocolSpec& protocol, const ObservationBounds& obs,
                  int k_max) {
  if (obs.levels.size() != protocol.levels.size())
    throw std::invalid_argument("bounds: observation/protocol size mismatch");
  if (k_max < 2) throw std::invalid_argument("bounds: k_max must be >= 2");
}

// Yield program over variables y_0..y_{k_max-1} in [0,1]. Every level adds
// one double-sided row; the tail relaxation loosens only the lower side.
LpProblem build_yield_lp(const ProtocolSpec& protocol,
                         const ObservationBounds& obs, int k_max,
                         int objective_k) {
  LpProblem p;
  p.objective.assign(k_max, 0.0);
  p.objective[objective_k] = 1.0;
  p.var_lower.assign(k_max, 0.0);
  p.var_upper.assign(k_max, 1.0);
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const PoissonRow pr = poisson_row(protocol.levels[j].mu, k_max);
    p.add_row(pr.coeff, obs.levels[j].y_lo - pr.tail, obs.levels[j].y_hi);
  }
  return p;
}

// Joint yield/error polytope in variables (y_0..y_{K-1}, c_0..c_{K-1}) with
// c_k <= y_k and the ratio row c_1 - t y_1 >= 0.
LpProblem build_b1_lp(const ProtocolSpec& protocol,
                      const ObservationBounds& obs, int k_max, double t) {
  const int n = 2 * k_max;
  LpProblem p;
  p.objective.assign(n, 0.0);
  p.var_lower.assign(n, 0.0);
  p.var_upper.assign(n, 1.0);
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const PoissonRow pr = poisson_row(protocol.levels[j].mu, k_max);
    std::vector<double> yield_row(n, 0.0);
    std::vector<double> error_row(n, 0.0);
    for (int k = 0; k < k_max; ++k) {
      yield_row[k] = pr.coeff[k];
      error_row[k_max + k] = pr.coeff[k];
    }
    p.add_row(std::move(yield_row), obs.levels[j].y_lo - pr.tail,
              obs.levels[j].y_hi);
    p.add_row(std::move(error_row), obs.levels[j].b_lo - pr.tail,
              obs.levels[j].b_hi);
  }
  for (int k = 0; k < k_max; ++k) {
    std::vector<double> row(n, 0.0);
    row[k] = -1.0;
    row[k_max + k] = 1.0;
    p.add_row(std::move(row), -1.0, 0.0);  // c_k - y_k <= 0
  }
  std::vector<double> ratio(n, 0.0);
  ratio[1] = -t;
  ratio[k_max + 1] = 1.0;
  p.add_row(std::move(ratio), 0.0, LpProblem::infinity());
  return p;
}

}  // namespace

PoissonRow poisson_row(double mu, int k_max) {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::domain_error("poisson_row: mu must be finite and >= 0");
  if (k_max < 1) throw std::domain_error("poisson_row: k_max must be >= 1");
  PoissonRow pr;
  pr.coeff.resize(k_max);
  double term = std::exp(-mu);
  double sum = 0.0;
  for (int k = 0; k < k_max; ++k) {
    pr.coeff[k] = term;
    sum += term;
    term *= mu / (k + 1);
  }
  pr.tail = std::max(0.0, 1.0 - sum);
  return pr;
}

double min_yield_value(const ProtocolSpec& protocol,
                       const ObservationBounds& obs, int k_max,
                       int objective_k) {
  check_shapes(protocol, obs, k_max);
  if (objective_k < 0 || objective_k >= k_max)
    throw std::invalid_argument("bounds: objective index outside truncation");
  const LpProblem p = build_yield_lp(protocol, obs, k_max, objective_k);
  const LpSolution sol = lp_solve(p);
  if (sol.status == LpSolution::Status::infeasible)
    throw InconsistentObservations(
        "observations inconsistent: no channel matches the yield intervals");
  if (!sol.optimal())
    throw std::runtime_error("bounds: yield program did not solve");
  return std::clamp(sol.value, 0.0, 1.0);
}

std::vector<double> min_single_photon(const ProtocolSpec& protocol,
                                      const ObservationBounds& obs,
                                      int k_max) {
  const double y1 = min_yield_value(protocol, obs, k_max, 1);
  std::vector<double> out;
  out.reserve(protocol.levels.size());
  for (const auto& lv : protocol.levels)
    out.push_back(std::exp(-lv.mu) * lv.mu * y1);
  return out;
}

std::vector<double> min_dark(const ProtocolSpec& protocol,
                             const ObservationBounds& obs, int k_max) {
  const double y0 = min_yield_value(protocol, obs, k_max, 0);
  std::vector<double> out;
  out.reserve(protocol.levels.size());
  for (const auto& lv : protocol.levels)
    out.push_back(std::exp(-lv.mu) * y0);
  return out;
}

bool b1_ratio_feasible(const ProtocolSpec& protocol,
                       const ObservationBounds& obs, int k_max, double t) {
  check_shapes(protocol, obs, k_max);
  return lp_feasible(build_b1_lp(protocol, obs, k_max, t));
}

double max_b1(const ProtocolSpec& protocol, const ObservationBounds& obs,
              int k_max) {
  check_shapes(protocol, obs, k_max);
  bool any_signal = false;
  for (const auto& lv : protocol.levels) any_signal = any_signal || lv.mu > 0;
  if (!any_signal)
    throw std::invalid_argument("max_b1: needs a level with mu > 0");

  if (!b1_ratio_feasible(protocol, obs, k_max, 0.0))
    throw InconsistentObservations(
        "observations inconsistent: joint yield/error polytope is empty");
  if (b1_ratio_feasible(protocol, obs, k_max, 1.0)) return 1.0;

  double lo = 0.0, hi = 1.0;
  while (hi - lo > kB1Tol) {
    const double mid = 0.5 * (lo + hi);
    if (b1_ratio_feasible(protocol, obs, k_max, mid))
      lo = mid;
    else
      hi = mid;
  }
  return hi;  // certified upper bound
}

SpsBounds solve_sps_bounds(const ProtocolSpec& protocol,
                           const ObservationBounds& obs, int k_max) {
  SpsBounds b;
  b.p_single = min_single_photon(protocol, obs, k_max);
  b.p_dark = min_dark(protocol, obs, k_max);
  b.b1_max = max_b1(protocol, obs, k_max);
  b.bisection_steps = static_cast<int>(std::ceil(std::log2(1.0 / kB1Tol)));
  return b;
}

}  // namespace decoykit
