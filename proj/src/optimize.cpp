#include "decoykit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

#include "decoykit/bounds.hpp"
#include "decoykit/rate.hpp"
#include "decoykit/stats.hpp"

namespace decoykit {

double rate_of(const ProtocolSpec& protocol, const SystemParams& params,
               const ChannelModel& channel) {
  const SessionTally tally = expected_tally(protocol, params, channel);
  const ObservationBounds obs = observation_bounds(tally, params.epsilon);
  const SpsBounds sps = solve_sps_bounds(protocol, obs, params.k_max);
  return key_length(tally, sps, params, protocol).rate;
}

namespace {

constexpr double kMuMin = 1e-4;
constexpr double kMuMax = 2.0;
constexpr double kProbMin = 1e-6;

// Search coordinates: log intensities for the free (nonzero) levels followed
// by softmax weights for every level past the first. Levels come out sorted
// by intensity; for >= 3 levels the first slot is the pinned vacuum.
struct Encoding {
  int n_levels = 3;
  bool pin_vacuum = false;
  int free_mus = 0;

  explicit Encoding(int levels)
      : n_levels(levels),
        pin_vacuum(levels >= 3),
        free_mus(pin_vacuum ? levels - 1 : levels) {}

  int dims() const { return free_mus + (n_levels - 1); }

  bool decode(const std::vector<double>& z, ProtocolSpec& out) const {
    std::vector<double> mus;
    if (pin_vacuum) mus.push_back(0.0);
    for (int i = 0; i < free_mus; ++i)
      mus.push_back(std::clamp(std::exp(z[i]), kMuMin, kMuMax));
    std::sort(mus.begin(), mus.end());
    for (std::size_t i = 1; i < mus.size(); ++i)
      if (mus[i] - mus[i - 1] <= 1e-9 * std::max(1.0, mus[i])) return false;

    std::vector<double> w(n_levels, 0.0);
    double wmax = 0.0;
    for (int i = 1; i < n_levels; ++i) {
      w[i] = std::clamp(z[free_mus + i - 1], -30.0, 30.0);
      wmax = std::max(wmax, w[i]);
    }
    double zsum = 0.0;
    std::vector<double> probs(n_levels);
    for (int i = 0; i < n_levels; ++i) {
      probs[i] = std::exp(w[i] - wmax);
      zsum += probs[i];
    }
    for (int i = 0; i < n_levels; ++i)
      probs[i] = std::max(kProbMin, probs[i] / zsum);
    double psum = 0.0;
    for (double p : probs) psum += p;
    for (double& p : probs) p /= psum;

    out.levels.clear();
    for (int i = 0; i < n_levels; ++i) {
      IntensityLevel lv;
      lv.mu = mus[static_cast<std::size_t>(i)];
      lv.probability = probs[static_cast<std::size_t>(i)];
      lv.encodes_key = (n_levels <= 2) || (i == n_levels - 1);
      out.levels.push_back(lv);
    }
    return true;
  }
};

struct Evaluator {
  const Encoding& enc;
  const SystemParams& params;
  const ChannelModel& channel;
  long evals = 0;

  // Negative rate (we minimize); invalid points rank below every rate.
  double operator()(const std::vector<double>& z) {
    ++evals;
    ProtocolSpec protocol;
    if (!enc.decode(z, protocol)) return 1.0;
    try {
      return -rate_of(protocol, params, channel);
    } catch (const std::exception&) {
      return 1.0;
    }
  }
};

double simplex_diameter(const std::vector<std::vector<double>>& pts) {
  double d = 0.0;
  for (std::size_t a = 1; a < pts.size(); ++a)
    for (std::size_t i = 0; i < pts[a].size(); ++i)
      d = std::max(d, std::fabs(pts[a][i] - pts[0][i]));
  return d;
}

// Standard Nelder-Mead on f, minimizing, with an evaluation budget.
std::pair<std::vector<double>, double> nelder_mead(
    Evaluator& f, std::vector<double> x0, double step, double tol,
    int max_evals) {
  const std::size_t d = x0.size();
  std::vector<std::vector<double>> x(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) x[i + 1][i] += step;
  std::vector<double> fx(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fx[i] = f(x[i]);
  long used = static_cast<long>(d) + 1;

  while (used < max_evals) {
    std::vector<std::size_t> order(d + 1);
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> xs(d + 1);
    std::vector<double> fs(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
      xs[i] = x[order[i]];
      fs[i] = fx[order[i]];
    }
    x.swap(xs);
    fx.swap(fs);

    if (simplex_diameter(x) < tol) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) centroid[k] += x[i][k] / d;

    auto blend = [&](double coef) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k)
        p[k] = centroid[k] + coef * (x[d][k] - centroid[k]);
      return p;
    };

    const std::vector<double> xr = blend(-1.0);
    const double fr = f(xr);
    ++used;
    if (fr < fx[0]) {
      const std::vector<double> xe = blend(-2.0);
      const double fe = f(xe);
      ++used;
      if (fe < fr) {
        x[d] = xe;
        fx[d] = fe;
      } else {
        x[d] = xr;
        fx[d] = fr;
      }
    } else if (fr < fx[d - 1]) {
      x[d] = xr;
      fx[d] = fr;
    } else {
      const bool outside = fr < fx[d];
      const std::vector<double> xc = blend(outside ? -0.5 : 0.5);
      const double fc = f(xc);
      ++used;
      if (fc < (outside ? fr : fx[d])) {
        x[d] = xc;
        fx[d] = fc;
      } else {
        for (std::size_t i = 1; i <= d; ++i) {
          for (std::size_t k = 0; k < d; ++k)
            x[i][k] = x[0][k] + 0.5 * (x[i][k] - x[0][k]);
          fx[i] = f(x[i]);
        }
        used += static_cast<long>(d);
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fx[i] < fx[best]) best = i;
  return {x[best], fx[best]};
}

std::vector<double> heuristic_start(const Encoding& enc,
                                    const SystemParams& params) {
  std::vector<double> z(enc.dims(), 0.0);
  const double mu_high =
      std::clamp(std::exp(-15.0 * (1.0 - params.visibility)), 0.1, 1.5);
  if (enc.n_levels == 1) {
    z[0] = std::log(mu_high);
  } else if (enc.n_levels == 2) {
    z[0] = std::log(0.15);
    z[1] = std::log(mu_high);
    z[2] = std::log(0.90 / 0.10);
  } else if (enc.n_levels == 3) {
    z[0] = std::log(0.08);
    z[1] = std::log(mu_high);
    z[2] = std::log(0.03 / 0.02);   // p_low / p_vacuum
    z[3] = std::log(0.95 / 0.02);   // p_high / p_vacuum
  } else {
    z[0] = std::log(0.06);
    z[1] = std::log(0.8 * mu_high);
    z[2] = std::log(1.2 * mu_high);
    z[3] = std::log(0.03 / 0.015);
    z[4] = std::log(0.20 / 0.015);
    z[5] = std::log(0.755 / 0.015);
  }
  return z;
}

struct StartOutcome {
  std::vector<double> z;
  double value = 1.0;
  long evals = 0;
};

StartOutcome run_start(const Encoding& enc, const SystemParams& params,
                       const ChannelModel& channel, std::vector<double> z0,
                       const OptimizeOptions& options) {
  Evaluator f{enc, params, channel};
  auto [z, value] = nelder_mead(f, std::move(z0), 0.35, options.simplex_tol,
                                options.max_evals_per_start);
  return {std::move(z), value, f.evals};
}

}  // namespace

OptimizeResult optimize_protocol(const SystemParams& params,
                                 const ChannelModel& channel, int n_levels,
                                 const OptimizeOptions& options) {
  if (n_levels < 1 || n_levels > 4)
    throw std::invalid_argument("optimize_protocol: n_levels must be 1..4");
  const Encoding enc(n_levels);

  std::vector<std::vector<double>> starts;
  starts.push_back(heuristic_start(enc, params));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> mu_jitter(0.0, 0.45);
  std::normal_distribution<double> w_jitter(0.0, 0.8);
  while (static_cast<int>(starts.size()) < std::max(1, options.starts)) {
    std::vector<double> z = starts.front();
    for (int i = 0; i < enc.free_mus; ++i) z[i] += mu_jitter(rng);
    for (int i = enc.free_mus; i < enc.dims(); ++i) z[i] += w_jitter(rng);
    starts.push_back(std::move(z));
  }

  std::vector<StartOutcome> outcomes(starts.size());
  if (options.jobs > 1) {
    std::vector<std::future<StartOutcome>> futs;
    futs.reserve(starts.size());
    for (auto& z0 : starts)
      futs.push_back(std::async(std::launch::async, run_start, std::cref(enc),
                                std::cref(params), std::cref(channel), z0,
                                std::cref(options)));
    for (std::size_t i = 0; i < futs.size(); ++i) outcomes[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i)
      outcomes[i] = run_start(enc, params, channel, starts[i], options);
  }

  // Deterministic reduction: best value, ties broken lexicographically on
  // the decoded intensities.
  long total_evals = 0;
  int best = 0;
  ProtocolSpec best_protocol;
  enc.decode(outcomes[0].z, best_protocol);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    total_evals += outcomes[i].evals;
    if (i == 0) continue;
    ProtocolSpec cand;
    if (!enc.decode(outcomes[i].z, cand)) continue;
    const double diff = outcomes[i].value - outcomes[best].value;
    bool take = diff < -1e-12;
    if (!take && std::fabs(diff) <= 1e-12) {
      for (std::size_t l = 0; l < cand.levels.size(); ++l) {
        if (cand.levels[l].mu != best_protocol.levels[l].mu) {
          take = cand.levels[l].mu < best_protocol.levels[l].mu;
          break;
        }
      }
    }
    if (take) {
      best = static_cast<int>(i);
      best_protocol = cand;
    }
  }

  std::vector<double> z = outcomes[best].z;
  double value = outcomes[best].value;

  if (options.coordinate_refine) {
    Evaluator f{enc, params, channel};
    for (double step : {0.05, 0.01}) {
      for (int sweep = 0; sweep < 2; ++sweep) {
        for (int i = 0; i < enc.dims(); ++i) {
          for (double dir : {+1.0, -1.0}) {
            std::vector<double> trial = z;
            trial[static_cast<std::size_t>(i)] += dir * step;
            const double fv = f(trial);
            if (fv < value) {
              value = fv;
              z = std::move(trial);
            }
          }
        }
      }
    }
    total_evals += f.evals;
  }

  OptimizeResult result;
  enc.decode(z, result.protocol);
  result.rate = std::max(0.0, -value);
  result.evaluations = total_evals;
  result.starts_run = static_cast<int>(starts.size());
  return result;
}

}  // namespace decoykit
