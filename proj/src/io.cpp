#include "decoykit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace decoykit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& source,
                    int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw ParseError(source, line, "trailing characters after number");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected a number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& text, const std::string& source, int line) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ParseError(source, line, "expected a boolean, got '" + text + "'");
}

struct LevelDraft {
  std::optional<double> mu;
  std::optional<double> prob;
  std::optional<bool> encodes_key;
  std::optional<std::vector<double>> q_row;
};

}  // namespace

ParseError::ParseError(const std::string& source, int line,
                       const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
      line_(line) {}

Config parse_config(std::istream& in, const std::string& source) {
  Config cfg;
  std::map<int, LevelDraft> levels;
  std::optional<double> eta, loss_db;
  bool have_epsilon = false, have_n = false, have_y0 = false, have_v = false;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError(source, line_no, "expected 'key = value'");

    if (key.rfind("level.", 0) == 0) {
      const auto rest = key.substr(6);
      const auto dot = rest.find('.');
      if (dot == std::string::npos)
        throw ParseError(source, line_no, "bad level key '" + key + "'");
      int index = 0;
      try {
        index = std::stoi(rest.substr(0, dot));
      } catch (const std::exception&) {
        throw ParseError(source, line_no, "bad level index in '" + key + "'");
      }
      const std::string field = rest.substr(dot + 1);
      LevelDraft& draft = levels[index];
      if (field == "mu") {
        draft.mu = parse_number(value, source, line_no);
      } else if (field == "prob") {
        draft.prob = parse_number(value, source, line_no);
      } else if (field == "encodes_key") {
        draft.encodes_key = parse_bool(value, source, line_no);
      } else if (field == "q") {
        std::vector<double> row;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
          row.push_back(parse_number(trim(item), source, line_no));
        draft.q_row = std::move(row);
      } else {
        throw ParseError(source, line_no, "unknown level field '" + field + "'");
      }
      continue;
    }

    if (key == "epsilon") {
      cfg.params.epsilon = parse_number(value, source, line_no);
      have_epsilon = true;
    } else if (key == "n_total") {
      cfg.params.n_total = parse_number(value, source, line_no);
      have_n = true;
    } else if (key == "y0") {
      cfg.params.y0 = parse_number(value, source, line_no);
      have_y0 = true;
    } else if (key == "visibility") {
      cfg.params.visibility = parse_number(value, source, line_no);
      have_v = true;
    } else if (key == "eta") {
      eta = parse_number(value, source, line_no);
    } else if (key == "loss_db") {
      loss_db = parse_number(value, source, line_no);
    } else if (key == "f_ec") {
      cfg.params.f_ec = parse_number(value, source, line_no);
    } else if (key == "k_max") {
      cfg.params.k_max =
          static_cast<int>(parse_number(value, source, line_no));
    } else if (key == "sift") {
      cfg.params.sift = parse_number(value, source, line_no);
    } else {
      throw ParseError(source, line_no, "unknown key '" + key + "'");
    }
  }

  if (!have_epsilon) throw ParseError(source, line_no, "missing epsilon");
  if (!have_n) throw ParseError(source, line_no, "missing n_total");
  if (!have_y0) throw ParseError(source, line_no, "missing y0");
  if (!have_v) throw ParseError(source, line_no, "missing visibility");
  if (eta && loss_db)
    throw ParseError(source, line_no, "give either eta or loss_db, not both");
  if (!eta && !loss_db)
    throw ParseError(source, line_no, "missing eta (or loss_db)");
  cfg.params.eta = eta ? *eta : std::pow(10.0, -*loss_db / 10.0);

  if (levels.empty()) throw ParseError(source, line_no, "no levels defined");
  int expected = 0;
  bool any_key_flag = false;
  for (const auto& [index, draft] : levels) {
    if (index != expected)
      throw ParseError(source, line_no,
                       "level indices must be contiguous from 0");
    ++expected;
    if (!draft.mu || !draft.prob)
      throw ParseError(source, line_no,
                       "level " + std::to_string(index) +
                           " needs both mu and prob");
    IntensityLevel lv;
    lv.mu = *draft.mu;
    lv.probability = *draft.prob;
    lv.encodes_key = draft.encodes_key.value_or(false);
    lv.q_row = draft.q_row;
    any_key_flag = any_key_flag || draft.encodes_key.has_value();
    cfg.protocol.levels.push_back(std::move(lv));
  }
  if (!any_key_flag) {
    int best = 0;
    for (std::size_t j = 1; j < cfg.protocol.levels.size(); ++j)
      if (cfg.protocol.levels[j].mu >
          cfg.protocol.levels[static_cast<std::size_t>(best)].mu)
        best = static_cast<int>(j);
    cfg.protocol.levels[static_cast<std::size_t>(best)].encodes_key = true;
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in, path);
}

void write_config(std::ostream& out, const Config& config) {
  const auto& p = config.params;
  out << "epsilon = " << format_double(p.epsilon) << "\n";
  out << "n_total = " << format_double(p.n_total) << "\n";
  out << "y0 = " << format_double(p.y0) << "\n";
  out << "visibility = " << format_double(p.visibility) << "\n";
  out << "eta = " << format_double(p.eta) << "\n";
  out << "f_ec = " << format_double(p.f_ec) << "\n";
  out << "k_max = " << p.k_max << "\n";
  out << "sift = " << format_double(p.sift) << "\n";
  for (std::size_t j = 0; j < config.protocol.levels.size(); ++j) {
    const auto& lv = config.protocol.levels[j];
    out << "level." << j << ".mu = " << format_double(lv.mu) << "\n";
    out << "level." << j << ".prob = " << format_double(lv.probability)
        << "\n";
    out << "level." << j
        << ".encodes_key = " << (lv.encodes_key ? "true" : "false") << "\n";
    if (lv.q_row) {
      out << "level." << j << ".q = ";
      for (std::size_t k = 0; k < lv.q_row->size(); ++k) {
        if (k) out << ",";
        out << format_double((*lv.q_row)[k]);
      }
      out << "\n";
    }
  }
}

SessionTally parse_tally(std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line))
    throw ParseError(source, 1, "empty tally file");
  ++line_no;
  if (trim(line) != "# decoykit-tally v1")
    throw ParseError(source, 1, "expected header '# decoykit-tally v1'");

  SessionTally tally;
  int expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    std::istringstream ss(body);
    int j = -1;
    double sent = 0, received = 0, errors = 0;
    if (!(ss >> j >> sent >> received >> errors))
      throw ParseError(source, line_no, "expected 'j N_j C_j E_j'");
    std::string extra;
    if (ss >> extra)
      throw ParseError(source, line_no, "trailing characters on tally line");
    if (j != expected)
      throw ParseError(source, line_no,
                       "level indices must be contiguous from 0");
    ++expected;
    if (!(errors >= 0.0) || errors > received || received > sent)
      throw ParseError(source, line_no, "requires 0 <= E <= C <= N");
    tally.levels.push_back({sent, received, errors});
  }
  if (tally.levels.empty())
    throw ParseError(source, line_no, "tally has no levels");
  return tally;
}

SessionTally load_tally(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tally file: " + path);
  return parse_tally(in, path);
}

void write_tally(std::ostream& out, const SessionTally& tally) {
  out << "# decoykit-tally v1\n";
  for (std::size_t j = 0; j < tally.levels.size(); ++j) {
    const auto& lv = tally.levels[j];
    out << j << " " << format_double(lv.sent) << " "
        << format_double(lv.received) << " " << format_double(lv.errors)
        << "\n";
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Prefer the shortest representation that round-trips exactly.
  for (int precision = 1; precision < 17; ++precision) {
    char shorter[64];
    std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

}  // namespace decoykit
