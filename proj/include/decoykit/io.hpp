#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "decoykit/model.hpp"

namespace decoykit {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_ = 0;
};

struct Config {
  ProtocolSpec protocol;
  SystemParams params;
};

/// Flat key = value text, one pair per line, '#' comments. Levels are
/// level.<i>.mu, level.<i>.prob, level.<i>.encodes_key and optionally
/// level.<i>.q as a comma-separated row. Loss may be given as eta or as
/// loss_db (eta = 10^(-dB/10)). If no level declares encodes_key, the
/// highest-intensity level is assumed to carry the key.
Config parse_config(std::istream& in, const std::string& source = "config");
Config load_config(const std::string& path);
void write_config(std::ostream& out, const Config& config);

/// Tally format: header "# decoykit-tally v1", then one line per level:
/// "j N_j C_j E_j" at full decimal precision.
SessionTally parse_tally(std::istream& in, const std::string& source = "tally");
SessionTally load_tally(const std::string& path);
void write_tally(std::ostream& out, const SessionTally& tally);

/// Shortest round-trippable decimal form, locale-independent.
std::string format_double(double v);

}  // namespace decoykit
