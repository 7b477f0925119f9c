#include "decoykit/model.hpp"

#include <cmath>
#include <sstream>

namespace decoykit {

int ProtocolSpec::highest_key_level() const {
  int best = -1;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (!levels[j].encodes_key) continue;
    if (best < 0 || levels[j].mu > levels[static_cast<std::size_t>(best)].mu)
      best = static_cast<int>(j);
  }
  return best;
}

std::vector<std::size_t> ProtocolSpec::key_levels() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < levels.size(); ++j)
    if (levels[j].encodes_key) out.push_back(j);
  return out;
}

double SessionTally::total_sent() const {
  double n = 0.0;
  for (const auto& lv : levels) n += lv.sent;
  return n;
}

namespace {

std::string level_tag(std::size_t j) {
  std::ostringstream os;
  os << "level " << j << ": ";
  return os.str();
}

}  // namespace

std::vector<std::string> validate(const ProtocolSpec& protocol,
                                  const SystemParams& params) {
  std::vector<std::string> v;

  if (protocol.levels.empty()) v.push_back("protocol has no levels");

  double prob_sum = 0.0;
  bool any_key = false;
  for (std::size_t j = 0; j < protocol.levels.size(); ++j) {
    const auto& lv = protocol.levels[j];
    if (!(lv.mu >= 0.0) || !std::isfinite(lv.mu))
      v.push_back(level_tag(j) + "mu must be finite and >= 0");
    if (!(lv.probability >= 0.0 && lv.probability <= 1.0))
      v.push_back(level_tag(j) + "probability outside [0,1]");
    if (lv.q_row) {
      for (double q : *lv.q_row) {
        if (!(q >= 0.0 && q <= 1.0)) {
          v.push_back(level_tag(j) + "q_row entry outside [0,1]");
          break;
        }
      }
    }
    prob_sum += lv.probability;
    any_key = any_key || lv.encodes_key;
  }

  if (!protocol.levels.empty() && std::fabs(prob_sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "probabilities sum != 1 (got " << prob_sum << ")";
    v.push_back(os.str());
  }

  for (std::size_t i = 0; i < protocol.levels.size(); ++i) {
    bool dup = false;
    for (std::size_t j = i + 1; j < protocol.levels.size(); ++j) {
      const double a = protocol.levels[i].mu;
      const double b = protocol.levels[j].mu;
      const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
      if (std::fabs(a - b) <= 1e-12 * scale) {
        v.push_back("intensities not distinct");
        dup = true;
        break;
      }
    }
    if (dup) break;
  }

  if (!protocol.levels.empty() && !any_key)
    v.push_back("no level encodes key bits");

  if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
    v.push_back("epsilon outside (0,1)");
  if (!(params.n_total >= 1.0) || !std::isfinite(params.n_total))
    v.push_back("n_total must be >= 1");
  if (!(params.y0 >= 0.0 && params.y0 <= 1.0))
    v.push_back("y0 outside [0,1]");
  if (!(params.visibility > 0.0 && params.visibility <= 1.0))
    v.push_back("visibility outside (0,1]");
  if (!(params.eta >= 0.0 && params.eta <= 1.0))
    v.push_back("eta outside [0,1]");
  if (!(params.f_ec > 0.0) || !std::isfinite(params.f_ec))
    v.push_back("f_ec must be positive");
  if (params.k_max < 2) v.push_back("k_max must be >= 2");
  if (!(params.sift > 0.0 && params.sift <= 1.0))
    v.push_back("sift outside (0,1]");

  return v;
}

std::vector<std::string> validate_tally(const SessionTally& tally,
                                        const ProtocolSpec& protocol,
                                        const SystemParams& params) {
  std::vector<std::string> v;
  if (tally.levels.size() != protocol.levels.size()) {
    v.push_back("tally level count does not match protocol");
    return v;
  }
  for (std::size_t j = 0; j < tally.levels.size(); ++j) {
    const auto& lv = tally.levels[j];
    if (!(lv.errors >= 0.0) || !(lv.errors <= lv.received) ||
        !(lv.received <= lv.sent) || !std::isfinite(lv.sent))
      v.push_back(level_tag(j) + "requires 0 <= E <= C <= N");
  }
  const double n = tally.total_sent();
  if (std::fabs(n - params.n_total) > 1e-9 * std::max(1.0, params.n_total))
    v.push_back("tally sent counts do not sum to n_total");
  return v;
}

}  // namespace decoykit
