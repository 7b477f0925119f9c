#include "decoykit/channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

namespace decoykit {

namespace {

double component_yield(const StationaryChannel& c, int k) {
  return 1.0 - (1.0 - c.y0) * std::pow(1.0 - c.eta, k);
}

double component_error(const StationaryChannel& c, int k) {
  // Dark clicks err half the time; signal clicks err with rate (1-V)/2.
  // The O(y0*eta) overlap is ignored.
  return 0.5 * c.y0 +
         0.5 * (1.0 - c.visibility) * (1.0 - std::pow(1.0 - c.eta, k));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent deterministic stream per (seed, stream id), so per-level
// sampling stays reproducible however levels are processed.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0xA0761D6478BD642Full * (stream + 1));
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<unsigned>(a), static_cast<unsigned>(a >> 32),
                    static_cast<unsigned>(b), static_cast<unsigned>(b >> 32)};
  return std::mt19937_64(seq);
}

long long draw_binomial(std::mt19937_64& rng, long long n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<long long> dist(n, p);
  return dist(rng);
}

}  // namespace

ChannelModel ChannelModel::stationary(double eta, double y0,
                                      double visibility) {
  ChannelModel m;
  m.components.push_back({StationaryChannel{eta, y0, visibility}, 1.0});
  return m;
}

ChannelModel ChannelModel::mixture(std::vector<Component> components) {
  if (components.empty())
    throw std::invalid_argument("channel mixture needs components");
  double fsum = 0.0;
  for (const auto& c : components) {
    if (!(c.frequency >= 0.0))
      throw std::invalid_argument("channel mixture frequency < 0");
    fsum += c.frequency;
  }
  if (std::fabs(fsum - 1.0) > 1e-12)
    throw std::invalid_argument("channel mixture frequencies must sum to 1");
  ChannelModel m;
  m.components = std::move(components);
  return m;
}

ChannelModel ChannelModel::from(const SystemParams& params) {
  return stationary(params.eta, params.y0, params.visibility);
}

double yield_k(const ChannelModel& channel, int k) {
  if (k < 0) throw std::domain_error("yield_k: k must be >= 0");
  double y = 0.0;
  for (const auto& c : channel.components)
    y += c.frequency * component_yield(c.channel, k);
  return y;
}

double error_k(const ChannelModel& channel, int k) {
  if (k < 0) throw std::domain_error("error_k: k must be >= 0");
  double e = 0.0;
  for (const auto& c : channel.components)
    e += c.frequency * component_error(c.channel, k);
  return e;
}

SessionTally expected_tally(const ProtocolSpec& protocol,
                            const SystemParams& params,
                            const ChannelModel& channel) {
  SessionTally tally;
  tally.levels.reserve(protocol.levels.size());
  for (const auto& lv : protocol.levels) {
    const double n_j = params.n_total * lv.probability;
    double click_rate = 0.0;
    double error_rate = 0.0;
    double term = std::exp(-lv.mu);
    for (int k = 0; k <= 500; ++k) {
      click_rate += term * yield_k(channel, k);
      error_rate += term * error_k(channel, k);
      term *= lv.mu / (k + 1);
      if (k >= lv.mu && term < 1e-16 * std::max(click_rate, 1e-300)) break;
    }
    LevelTally t;
    t.sent = n_j;
    t.received = params.sift * n_j * click_rate;
    t.errors = params.sift * n_j * error_rate;
    tally.levels.push_back(t);
  }
  return tally;
}

SessionTally sample_tally(const ProtocolSpec& protocol,
                          const SystemParams& params,
                          const ChannelModel& channel, std::uint64_t seed) {
  const long long n_total = std::llround(params.n_total);
  SessionTally tally;
  tally.levels.resize(protocol.levels.size());

  // Level assignment: sequential conditional binomials == multinomial.
  std::mt19937_64 level_rng = make_stream(seed, 0);
  std::vector<long long> sent(protocol.levels.size(), 0);
  long long remaining = n_total;
  double prob_left = 1.0;
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const double p = protocol.levels[j].probability;
    if (j + 1 == protocol.levels.size()) {
      sent[j] = remaining;
    } else {
      const double cond = prob_left > 0.0 ? std::min(1.0, p / prob_left) : 0.0;
      sent[j] = draw_binomial(level_rng, remaining, cond);
      remaining -= sent[j];
      prob_left -= p;
    }
  }

  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    std::mt19937_64 rng = make_stream(seed, j + 1);
    const double mu = protocol.levels[j].mu;
    const int k_cap = static_cast<int>(
        std::ceil(mu + 12.0 * std::sqrt(mu + 1.0) + 30.0));

    long long clicks = 0, kept = 0, errors = 0;
    long long rem = sent[j];
    double term = std::exp(-mu);
    double mass_left = 1.0;
    for (int k = 0; k <= k_cap && rem > 0; ++k) {
      long long n_k;
      if (k == k_cap) {
        n_k = rem;  // leftover tail collapses onto the cap
      } else {
        const double cond =
            mass_left > 0.0 ? std::min(1.0, term / mass_left) : 0.0;
        n_k = draw_binomial(rng, rem, cond);
        mass_left -= term;
        term *= mu / (k + 1);
      }
      rem -= n_k;
      if (n_k <= 0) continue;
      const double y = yield_k(channel, k);
      const double c = error_k(channel, k);
      const long long clicked = draw_binomial(rng, n_k, y);
      const long long sifted = draw_binomial(rng, clicked, params.sift);
      const double err_given_click =
          y > 0.0 ? std::clamp(c / y, 0.0, 1.0) : 0.0;
      const long long errs = draw_binomial(rng, sifted, err_given_click);
      clicks += clicked;
      kept += sifted;
      errors += errs;
    }
    tally.levels[j].sent = static_cast<double>(sent[j]);
    tally.levels[j].received = static_cast<double>(kept);
    tally.levels[j].errors = static_cast<double>(errors);
  }
  return tally;
}

DetectorPreset detector_preset(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (key == "snspd") return {"snspd", 0.02, 1.44e-8, 7.0};
  if (key == "tes") return {"tes", 0.50, 4e-6, 7.0};
  if (key == "apd") return {"apd", 0.10, 1.5e-5, 7.0};
  throw std::invalid_argument("unknown detector preset: " + key);
}

SystemParams apply_detector(const SystemParams& params,
                            const DetectorPreset& preset, double fiber_km,
                            double fiber_db_per_km) {
  SystemParams out = params;
  out.y0 = preset.dark_prob;
  const double loss_db = preset.optics_loss_db + fiber_db_per_km * fiber_km;
  out.eta = std::pow(10.0, -loss_db / 10.0) * preset.efficiency;
  return out;
}

}  // namespace decoykit
